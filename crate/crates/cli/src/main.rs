//! Operator surface for the rlvr lab: train policies on synthetic
//! verifiable tasks, sweep hyperparameters, evaluate checkpoints, analyze
//! rollout logs, and verify objective gradients.

mod cmd_analyze;
mod cmd_eval;
mod cmd_gradcheck;
mod cmd_sweep;
mod cmd_train;
mod config;
mod rundir;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "rlvr", version, about = "Desk-scale RL-with-verifiable-rewards lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from a config file.
    Train(TrainArgs),
    /// Train once per value of one hyperparameter axis.
    Sweep(SweepArgs),
    /// Evaluate a checkpoint: avg@K / pass@K on a task set.
    Eval(EvalArgs),
    /// Produce the analytics CSV bundle from rollout logs.
    Analyze(AnalyzeArgs),
    /// Verify objective gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file path, or a bare name resolved as configs/<name>.toml.
    #[arg(long)]
    config: String,
    /// Override the objective algorithm (grpo, dapo, archer).
    #[arg(long)]
    algo: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override total training steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Override the learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Generic override: dotted TOML path, e.g. --set train.model.dim=48.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<config::FileConfig> {
        let path = config::resolve_config_path(&self.config)?;
        config::load_config(
            &path,
            &config::Overrides {
                algo: self.algo.clone(),
                seed: self.seed,
                steps: self.steps,
                learning_rate: self.lr,
                sets: self.sets.clone(),
            },
        )
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Run directory (default: <run root>/<name>-<timestamp>-s<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Axis to sweep: beta_knowledge, eps_knowledge, or eps_reasoning.
    #[arg(long)]
    axis: String,
    /// Comma-separated values, e.g. 0,0.001,0.005.
    #[arg(long)]
    values: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Task specs kind:difficulty (repeatable), e.g. --tasks addition:2.
    #[arg(long = "tasks", value_name = "KIND:DIFFICULTY")]
    tasks: Vec<String>,
    /// Evaluate a previously exported task set instead of generating one.
    #[arg(long)]
    task_file: Option<PathBuf>,
    /// Instances per task spec when generating.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Samples per instance.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Sampling temperature.
    #[arg(long, default_value_t = 0.8)]
    temperature: f64,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed for task-set generation.
    #[arg(long, default_value_t = 1234)]
    task_seed: u64,
    /// Output CSV path.
    #[arg(long, default_value = "eval.csv")]
    out: PathBuf,
    /// Also export the evaluated task set as line-delimited JSON.
    #[arg(long)]
    export_tasks: Option<PathBuf>,
    /// Task kinds that define the checkpoint's vocabulary when it differs
    /// from the evaluated set, e.g. --vocab-tasks addition,sort.
    #[arg(long, value_delimiter = ',')]
    vocab_tasks: Option<Vec<String>>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Rollout log files (JSONL), concatenated.
    #[arg(long = "logs", required = true)]
    logs: Vec<PathBuf>,
    /// Output directory for the CSV bundle.
    #[arg(long, default_value = "analysis")]
    out_dir: PathBuf,
    /// Entropy quantile level.
    #[arg(long, default_value_t = 0.8)]
    rho: f64,
    /// Highest/lowest-entropy occurrences taken per response.
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Minimum corpus count for the frequency tables.
    #[arg(long, default_value_t = 10)]
    min_count: usize,
    /// Reasoning-class clip half-width for region geometry.
    #[arg(long, default_value_t = 0.5)]
    eps_reasoning: f64,
    /// Knowledge-class clip half-width for region geometry.
    #[arg(long, default_value_t = 0.2)]
    eps_knowledge: f64,
    /// Score ratios against this checkpoint (otherwise rollout-time view).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// vocab.json from the run dir, for token text in frequency tables.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Std of the current-policy perturbation.
    #[arg(long, default_value_t = 0.02)]
    scale: f64,
    /// Negative-control hook: corrupt one analytic gradient entry.
    #[arg(long, hide = true)]
    corrupt: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.config.load()?;
            let dir = rundir::create_run_dir(args.out.as_deref(), &cfg.name, cfg.train.seed)?;
            cmd_train::run(cfg, &dir)?;
            Ok(true)
        }
        Command::Sweep(args) => {
            let cfg = args.config.load()?;
            let axis = rlvr_core::trainer::SweepAxis::from_str(&args.axis)?;
            let values: Vec<f64> = args
                .values
                .split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value {v:?}")))
                .collect::<Result<_>>()?;
            if values.is_empty() {
                anyhow::bail!("--values must list at least one value");
            }
            let name = format!("{}-sweep-{}", cfg.name, axis.name());
            let dir = rundir::create_run_dir(args.out.as_deref(), &name, cfg.train.seed)?;
            cmd_sweep::run(cfg, axis, &values, &dir)?;
            Ok(true)
        }
        Command::Eval(args) => {
            let tasks = args
                .tasks
                .iter()
                .map(|s| cmd_eval::parse_task_spec(s))
                .collect::<Result<Vec<_>>>()?;
            let vocab_tasks = args
                .vocab_tasks
                .map(|kinds| {
                    kinds
                        .iter()
                        .map(|k| rlvr_core::envs::TaskKind::from_str(k).map_err(Into::into))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            cmd_eval::run(cmd_eval::EvalArgsResolved {
                checkpoint: args.checkpoint,
                tasks,
                task_file: args.task_file,
                instances: args.instances,
                k: args.k,
                temperature: args.temperature,
                seed: args.seed,
                task_seed: args.task_seed,
                out: args.out,
                export_tasks: args.export_tasks,
                vocab_tasks,
            })?;
            Ok(true)
        }
        Command::Analyze(args) => {
            cmd_analyze::run(cmd_analyze::AnalyzeArgsResolved {
                logs: args.logs,
                out_dir: args.out_dir,
                rho: args.rho,
                top_k: args.top_k,
                min_count: args.min_count,
                eps_reasoning: args.eps_reasoning,
                eps_knowledge: args.eps_knowledge,
                checkpoint: args.checkpoint,
                vocab: args.vocab,
            })?;
            Ok(true)
        }
        Command::Gradcheck(args) => cmd_gradcheck::run(args.seed, args.scale, args.corrupt),
    }
}
