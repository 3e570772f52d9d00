//! `rlvr sweep`: train once per axis value with a shared seed and emit a
//! combined comparison CSV.

use crate::config::FileConfig;
use anyhow::{Context, Result};
use rlvr_core::trainer::{apply_axis, SweepAxis};
use std::io::Write;
use std::path::Path;

pub fn run(base: FileConfig, axis: SweepAxis, values: &[f64], dir: &Path) -> Result<()> {
    let mut all_reports = Vec::new();
    for &value in values {
        let mut cfg = base.clone();
        cfg.train = apply_axis(&base.train, axis, value);
        cfg.train.validate()?;
        let sub = dir.join(format!("{}={}", axis.name(), value));
        std::fs::create_dir(&sub)
            .with_context(|| format!("creating sweep member dir {}", sub.display()))?;
        println!("== {} = {} ==", axis.name(), value);
        crate::cmd_train::run(cfg, &sub)?;
        // Reload the member's reports for the comparison file.
        let text = std::fs::read_to_string(sub.join("step_reports.jsonl"))?;
        let reports: Vec<rlvr_core::trainer::StepReport> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()
            .context("parsing member step reports")?;
        all_reports.push((value, reports));
    }

    let mut csv = std::fs::File::create(dir.join("sweep_comparison.csv"))?;
    writeln!(
        csv,
        "axis,value,step,mean_reward,mean_entropy,repetition_ratio,loss,kept_groups,skipped"
    )?;
    for (value, reports) in &all_reports {
        for r in reports {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                axis.name(),
                value,
                r.step,
                r.mean_reward,
                r.mean_entropy,
                r.repetition_ratio,
                r.loss,
                r.kept_groups,
                r.skipped
            )?;
        }
    }
    println!("sweep complete: {}", dir.display());
    Ok(())
}
