//! `rlvr train`: run the training loop and write the run directory.

use crate::config::FileConfig;
use crate::rundir::{now_utc, RunManifest};
use anyhow::{Context, Result};
use rlvr_core::policy::{write_checkpoint, PolicyParams, RngState};
use rlvr_core::rollout::{write_log_records, RolloutLogRecord};
use rlvr_core::trainer::{train, StepReport, TrainObserver};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

struct FileSink {
    dir: PathBuf,
    reports_jsonl: BufWriter<File>,
    reports_csv: BufWriter<File>,
    rollouts: BufWriter<File>,
    files: Vec<String>,
    print_every: u64,
    total_steps: u64,
}

impl FileSink {
    fn new(dir: &Path, total_steps: u64) -> Result<FileSink> {
        let open = |name: &str| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(File::create(dir.join(name)).with_context(
                || format!("creating {}", dir.join(name).display()),
            )?))
        };
        let mut reports_csv = open("step_reports.csv")?;
        writeln!(reports_csv, "{}", StepReport::csv_header())?;
        Ok(FileSink {
            dir: dir.to_path_buf(),
            reports_jsonl: open("step_reports.jsonl")?,
            reports_csv,
            rollouts: open("rollouts.jsonl")?,
            files: vec![
                "step_reports.jsonl".into(),
                "step_reports.csv".into(),
                "rollouts.jsonl".into(),
            ],
            print_every: (total_steps / 25).max(1),
            total_steps,
        })
    }

    fn finish(mut self) -> Result<Vec<String>> {
        self.reports_jsonl.flush()?;
        self.reports_csv.flush()?;
        self.rollouts.flush()?;
        Ok(self.files)
    }
}

impl TrainObserver for FileSink {
    fn on_step(&mut self, report: &StepReport, _params: &PolicyParams) -> ControlFlow<()> {
        let line = serde_json::to_string(report).expect("serializable report");
        writeln!(self.reports_jsonl, "{line}").expect("step report write");
        writeln!(self.reports_csv, "{}", report.to_csv_row()).expect("step report write");
        if report.step % self.print_every == 0 || report.step + 1 == self.total_steps {
            println!(
                "step {:>6}  reward {:>6.3}  kept {:>3}  entropy {:>6.3}  repetition {:>5.3}  loss {:>+9.5}",
                report.step,
                report.mean_reward,
                report.kept_groups,
                report.mean_entropy,
                report.repetition_ratio,
                report.loss,
            );
        }
        ControlFlow::Continue(())
    }

    fn on_rollout_log(&mut self, _step: u64, records: &[RolloutLogRecord]) {
        write_log_records(&mut self.rollouts, records).expect("rollout log write");
    }

    fn on_checkpoint(&mut self, step: u64, params: &PolicyParams, rng: RngState) {
        let name = format!("ckpt_step{step}.bin");
        let mut f = BufWriter::new(File::create(self.dir.join(&name)).expect("checkpoint file"));
        write_checkpoint(&mut f, params, rng).expect("checkpoint write");
        f.flush().expect("checkpoint flush");
        self.files.push(name);
    }

    fn on_warning(&mut self, _step: u64, message: &str) {
        eprintln!("warning: {message}");
    }
}

pub fn write_vocab_json(dir: &Path, vocab: &rlvr_core::envs::Vocab) -> Result<()> {
    let symbols: Vec<String> = vocab.symbols().iter().map(|c| c.to_string()).collect();
    let json = serde_json::json!({ "symbols": symbols });
    std::fs::write(dir.join("vocab.json"), serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

pub fn run(cfg: FileConfig, dir: &Path) -> Result<()> {
    let started_at = now_utc();
    std::fs::write(
        dir.join("config.toml"),
        crate::config::to_toml_snapshot(&cfg)?,
    )?;
    write_vocab_json(dir, &cfg.train.vocab())?;

    let mut sink = FileSink::new(dir, cfg.train.total_steps)?;
    let outcome = train(&cfg.train, &mut sink)?;

    // The trainer emits the final checkpoint through the observer; give it
    // a stable alias as well.
    let final_name = format!("ckpt_step{}.bin", outcome.completed_steps);
    std::fs::copy(dir.join(&final_name), dir.join("ckpt_final.bin"))
        .with_context(|| format!("copying {final_name} to ckpt_final.bin"))?;

    let mut files = sink.finish()?;
    files.push("config.toml".into());
    files.push("vocab.json".into());
    files.push("ckpt_final.bin".into());
    files.sort();
    files.dedup();
    let manifest = RunManifest {
        name: cfg.name.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.train.seed,
        started_at,
        finished_at: now_utc(),
        config: cfg,
        files,
    };
    manifest.write(dir)?;
    println!("run complete: {}", dir.display());
    Ok(())
}
