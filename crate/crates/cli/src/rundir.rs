//! Run directories and manifests.
//!
//! Every command that produces files confines them to one run directory,
//! named `<name>-<UTC timestamp>-s<seed>` under the run root (`--out`
//! overrides the full path; `RLVR_RUN_ROOT` overrides the root, default
//! `./runs`). Creation fails rather than clobbering an existing directory.
//! The manifest written on successful exit lists every produced file.

use anyhow::{bail, Context, Result};
use std::path::{Path, PathBuf};

pub const RUN_ROOT_ENV: &str = "RLVR_RUN_ROOT";

pub fn default_run_root() -> PathBuf {
    std::env::var_os(RUN_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Create the run directory: `out` verbatim when given, otherwise
/// `<root>/<name>-<timestamp>-s<seed>`.
pub fn create_run_dir(out: Option<&Path>, name: &str, seed: u64) -> Result<PathBuf> {
    let dir = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S");
            default_run_root().join(format!("{name}-{stamp}-s{seed}"))
        }
    };
    if dir.exists() {
        bail!(
            "run directory {} already exists; refusing to clobber",
            dir.display()
        );
    }
    if let Some(parent) = dir.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating run root {}", parent.display()))?;
        }
    }
    std::fs::create_dir(&dir).with_context(|| format!("creating run dir {}", dir.display()))?;
    Ok(dir)
}

/// Everything needed to reproduce and locate a run.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub code_version: String,
    pub master_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub config: crate::config::FileConfig,
    /// Paths relative to the run directory; every listed file exists on
    /// successful exit.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let p = dir.join(f);
            if !p.exists() {
                bail!("manifest refers to missing file {}", p.display());
            }
        }
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(&path, json)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(())
    }
}

pub fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
