//! `rlvr analyze`: turn rollout logs into the analytics CSV bundle
//! (entropy_stats.csv, regions.csv, frequency_high.csv, frequency_low.csv).
//!
//! Region ratios compare a checkpoint's current logprobs against the
//! logged rollout logprobs when `--checkpoint` is given; without one the
//! rollout-time view has ratio 1 everywhere, which lands every token in
//! region A.

use anyhow::{bail, Context, Result};
use rlvr_core::analytics::{
    clip_region, entropy_stats, token_frequency_report, write_entropy_stats_csv,
    write_frequency_csv, write_regions_csv, AdvantageSign, ClipRegionHistogram,
};
use rlvr_core::objective::{Algorithm, ObjectiveConfig};
use rlvr_core::policy::{logprobs_under, read_checkpoint, PolicyParams};
use rlvr_core::rollout::{read_log_records, RolloutLogRecord};
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub struct AnalyzeArgsResolved {
    pub logs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub rho: f64,
    pub top_k: usize,
    pub min_count: usize,
    pub eps_reasoning: f64,
    pub eps_knowledge: f64,
    pub checkpoint: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
}

fn load_symbols(path: &Path) -> Result<Vec<char>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading vocab {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let symbols = v
        .get("symbols")
        .and_then(|s| s.as_array())
        .with_context(|| format!("{}: expected {{\"symbols\": [...]}}", path.display()))?;
    symbols
        .iter()
        .map(|s| {
            s.as_str()
                .and_then(|s| s.chars().next())
                .context("vocab symbols must be single-character strings")
        })
        .collect()
}

fn region_histogram(
    records: &[&RolloutLogRecord],
    cfg: &ObjectiveConfig,
    checkpoint: Option<&PolicyParams>,
) -> Result<ClipRegionHistogram> {
    let mut hist = ClipRegionHistogram::default();
    for rec in records {
        if rec.token_classes.len() != rec.tokens.len() {
            continue; // unprepared record (no classes); nothing to count
        }
        let current: Option<Vec<f64>> = match checkpoint {
            Some(params) => Some(logprobs_under(
                params,
                &rec.prompt_tokens,
                &rec.tokens,
                1.0,
            )?),
            None => None,
        };
        let sign = AdvantageSign::of(rec.advantage);
        for (t, &class) in rec.token_classes.iter().enumerate() {
            let ratio = match &current {
                Some(lp) => (lp[t] - rec.logprobs_old[t]).exp(),
                None => 1.0,
            };
            let region = clip_region(ratio, sign, class, cfg)?;
            hist.record(region, class, sign);
        }
    }
    Ok(hist)
}

pub fn run(args: AnalyzeArgsResolved) -> Result<()> {
    let mut records = Vec::new();
    for path in &args.logs {
        let f = std::fs::File::open(path)
            .with_context(|| format!("opening rollout log {}", path.display()))?;
        records.extend(read_log_records(BufReader::new(f))?);
    }
    if records.is_empty() {
        bail!("no records");
    }
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let checkpoint = match &args.checkpoint {
        Some(p) => {
            let mut f = BufReader::new(
                std::fs::File::open(p).with_context(|| format!("opening checkpoint {}", p.display()))?,
            );
            Some(read_checkpoint(&mut f)?.0)
        }
        None => None,
    };
    let symbols = args.vocab.as_deref().map(load_symbols).transpose()?;

    let mut steps: Vec<u64> = records.iter().map(|r| r.step).collect();
    steps.sort_unstable();
    steps.dedup();

    let objective = ObjectiveConfig {
        algorithm: Algorithm::Archer,
        eps_reasoning: args.eps_reasoning,
        eps_knowledge: args.eps_knowledge,
        rho: args.rho,
        ..ObjectiveConfig::default()
    };
    objective.validate()?;

    let mut stats_per_step = Vec::new();
    let mut regions_per_step = Vec::new();
    for &step in &steps {
        let step_records: Vec<&RolloutLogRecord> =
            records.iter().filter(|r| r.step == step).collect();
        let owned: Vec<RolloutLogRecord> =
            step_records.iter().map(|r| (*r).clone()).collect();
        stats_per_step.push((step, entropy_stats(&owned, args.rho)?));
        regions_per_step.push((
            step,
            region_histogram(&step_records, &objective, checkpoint.as_ref())?,
        ));
    }

    let (high, low) = token_frequency_report(&records, args.top_k, args.min_count);

    let write = |name: &str, body: &dyn Fn(&mut std::fs::File) -> Result<()>| -> Result<()> {
        let mut f = std::fs::File::create(args.out_dir.join(name))
            .with_context(|| format!("creating {name}"))?;
        body(&mut f)
    };
    write("entropy_stats.csv", &|f| {
        write_entropy_stats_csv(f, &stats_per_step).map_err(Into::into)
    })?;
    write("regions.csv", &|f| {
        write_regions_csv(f, &regions_per_step).map_err(Into::into)
    })?;
    write("frequency_high.csv", &|f| {
        write_frequency_csv(f, &high, symbols.as_deref()).map_err(Into::into)
    })?;
    write("frequency_low.csv", &|f| {
        write_frequency_csv(f, &low, symbols.as_deref()).map_err(Into::into)
    })?;
    println!(
        "analyzed {} records over {} steps -> {}",
        records.len(),
        steps.len(),
        args.out_dir.display()
    );
    Ok(())
}
