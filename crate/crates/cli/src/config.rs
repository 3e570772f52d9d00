//! Versioned TOML run configuration.
//!
//! A config file wraps the trainer configuration plus an evaluation
//! section:
//!
//! ```toml
//! version = 1
//! name = "desk_addition"
//!
//! [train]
//! total_steps = 1500
//! seed = 0
//! # ... every trainer field; omitted fields take defaults
//!
//! [eval]
//! instances = 200
//! k = 1
//! temperature = 0.8
//! seed = 777
//! ```
//!
//! Command-line overrides (`--algo`, `--seed`, `--steps`, `--lr`, and
//! generic `--set path.to.key=value`) are applied to the parsed TOML value
//! before deserialization, so they take precedence over the file.

use anyhow::{bail, Context, Result};
use rlvr_core::trainer::TrainConfig;
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

/// Held-out evaluation settings used by `train` progress reporting and the
/// `eval` command defaults.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EvalSection {
    pub instances: usize,
    pub k: usize,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            instances: 200,
            k: 1,
            temperature: 0.8,
            seed: 777,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FileConfig {
    pub version: u32,
    pub name: String,
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
}

/// Resolve `--config`: an existing path as-is, otherwise
/// `configs/<name>.toml` under the current directory.
pub fn resolve_config_path(spec: &str) -> Result<PathBuf> {
    let direct = Path::new(spec);
    if direct.is_file() {
        return Ok(direct.to_path_buf());
    }
    let named = Path::new("configs").join(format!("{spec}.toml"));
    if named.is_file() {
        return Ok(named);
    }
    bail!("config not found: no file at {spec:?} or {named:?}");
}

/// Typed overrides from dedicated flags.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub algo: Option<String>,
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub learning_rate: Option<f64>,
    pub sets: Vec<String>,
}

fn parse_toml_scalar(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}

fn set_path(root: &mut toml::Value, dotted: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = dotted.split('.').collect();
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .with_context(|| format!("--set {dotted}: {part} is not a table"))?;
        if i == parts.len() - 1 {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    unreachable!("split never yields zero parts");
}

/// Load, override, and validate a config file.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    // Validate the file on its own first; toml::from_str errors carry
    // line/column spans, unlike deserialization from a Value.
    let _: FileConfig = toml::from_str(&text)
        .with_context(|| format!("invalid config {}", path.display()))?;
    let mut value: toml::Value = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;
    if let Some(algo) = &overrides.algo {
        set_path(
            &mut value,
            "train.objective.algorithm",
            toml::Value::String(algo.clone()),
        )?;
    }
    if let Some(seed) = overrides.seed {
        set_path(&mut value, "train.seed", toml::Value::Integer(seed as i64))?;
    }
    if let Some(steps) = overrides.steps {
        set_path(
            &mut value,
            "train.total_steps",
            toml::Value::Integer(steps as i64),
        )?;
    }
    if let Some(lr) = overrides.learning_rate {
        set_path(&mut value, "train.learning_rate", toml::Value::Float(lr))?;
    }
    for spec in &overrides.sets {
        let (key, raw) = spec
            .split_once('=')
            .with_context(|| format!("--set {spec}: expected key=value"))?;
        set_path(&mut value, key, parse_toml_scalar(raw))?;
    }
    let cfg: FileConfig = value
        .try_into()
        .with_context(|| format!("invalid config {}", path.display()))?;
    if cfg.version != CONFIG_VERSION {
        bail!(
            "config {} has version {}, this build supports {}",
            path.display(),
            cfg.version,
            CONFIG_VERSION
        );
    }
    cfg.train.validate()?;
    Ok(cfg)
}

/// Serialize the resolved config back to TOML for the run-dir snapshot.
pub fn to_toml_snapshot(cfg: &FileConfig) -> Result<String> {
    toml::to_string_pretty(cfg).context("serializing config snapshot")
}
