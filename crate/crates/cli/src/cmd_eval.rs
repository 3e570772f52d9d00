//! `rlvr eval`: avg@K / pass@K of a checkpoint on a synthetic task set.

use anyhow::{bail, Context, Result};
use rlvr_core::analytics::{evaluate_policy, summarize_eval, write_eval_csv};
use rlvr_core::envs::{
    export_task_set, generate_instance, import_task_set, TaskInstance, TaskKind, Vocab,
};
use rlvr_core::policy::read_checkpoint;
use rlvr_core::rng::{derive_seed, Stream};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone)]
pub struct EvalArgsResolved {
    pub checkpoint: PathBuf,
    pub tasks: Vec<(TaskKind, u32)>,
    pub task_file: Option<PathBuf>,
    pub instances: usize,
    pub k: usize,
    pub temperature: f64,
    pub seed: u64,
    pub task_seed: u64,
    pub out: PathBuf,
    pub export_tasks: Option<PathBuf>,
    pub vocab_tasks: Option<Vec<TaskKind>>,
}

/// Parse `kind:difficulty` specs like `addition:2`.
pub fn parse_task_spec(s: &str) -> Result<(TaskKind, u32)> {
    let (kind, diff) = s
        .split_once(':')
        .with_context(|| format!("task spec {s:?}: expected kind:difficulty"))?;
    let kind = TaskKind::from_str(kind)?;
    let difficulty: u32 = diff
        .parse()
        .with_context(|| format!("task spec {s:?}: bad difficulty"))?;
    Ok((kind, difficulty))
}

fn build_vocab(args: &EvalArgsResolved, kinds_in_set: &[TaskKind]) -> Vocab {
    match &args.vocab_tasks {
        Some(kinds) => Vocab::for_tasks(kinds),
        None => Vocab::for_tasks(kinds_in_set),
    }
}

pub fn run(args: EvalArgsResolved) -> Result<()> {
    let mut file = BufReader::new(
        std::fs::File::open(&args.checkpoint)
            .with_context(|| format!("opening checkpoint {}", args.checkpoint.display()))?,
    );
    let (params, _rng) = read_checkpoint(&mut file)?;

    // Instances grouped by scope (task kind + difficulty).
    let mut scoped: Vec<(String, Vec<TaskInstance>)> = Vec::new();
    let kinds_in_set: Vec<TaskKind>;
    if let Some(task_file) = &args.task_file {
        // The vocabulary must be fixed before parsing prompts; probe kinds
        // from a first pass over the records.
        let text = std::fs::read_to_string(task_file)
            .with_context(|| format!("reading task set {}", task_file.display()))?;
        let mut kinds: Vec<TaskKind> = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let v: serde_json::Value = serde_json::from_str(line)?;
            if let Some(k) = v.get("task_kind").and_then(|k| k.as_str()) {
                let kind = TaskKind::from_str(k)?;
                if !kinds.contains(&kind) {
                    kinds.push(kind);
                }
            }
        }
        kinds_in_set = kinds;
        let vocab = build_vocab(&args, &kinds_in_set);
        check_vocab(&vocab, &params)?;
        let instances = import_task_set(text.as_bytes(), &vocab)?;
        for inst in instances {
            let scope = format!("{}:{}", inst.task_kind.name(), inst.difficulty);
            match scoped.iter_mut().find(|(s, _)| *s == scope) {
                Some((_, v)) => v.push(inst),
                None => scoped.push((scope, vec![inst])),
            }
        }
    } else {
        if args.tasks.is_empty() {
            bail!("eval needs --tasks kind:difficulty or --task-file");
        }
        kinds_in_set = args.tasks.iter().map(|(k, _)| *k).collect();
        let vocab = build_vocab(&args, &kinds_in_set);
        check_vocab(&vocab, &params)?;
        for (si, &(kind, difficulty)) in args.tasks.iter().enumerate() {
            let instances: Vec<TaskInstance> = (0..args.instances)
                .map(|i| {
                    generate_instance(
                        &vocab,
                        kind,
                        difficulty,
                        derive_seed(args.task_seed, Stream::Eval, si as u64, i as u64),
                    )
                })
                .collect::<std::result::Result<_, _>>()?;
            scoped.push((format!("{}:{}", kind.name(), difficulty), instances));
        }
    }

    let vocab = build_vocab(&args, &kinds_in_set);
    if let Some(path) = &args.export_tasks {
        let all: Vec<TaskInstance> = scoped.iter().flat_map(|(_, v)| v.iter().cloned()).collect();
        let mut f = std::fs::File::create(path)
            .with_context(|| format!("creating task export {}", path.display()))?;
        export_task_set(&mut f, &all)?;
    }

    let mut results = Vec::new();
    for (scope, instances) in &scoped {
        let flags = evaluate_policy(
            &params,
            &vocab,
            instances,
            args.k,
            args.temperature,
            args.seed,
        )?;
        results.push((scope.clone(), flags));
    }
    let rows = summarize_eval(&results, args.k);
    let mut out = std::fs::File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_eval_csv(&mut out, &rows)?;
    for r in &rows {
        println!(
            "{:>24}  instances {:>5}  avg@{} {:.4}  pass@{} {:.4}",
            r.scope, r.instances, r.k, r.avg_at_k, r.k, r.pass_at_k
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn check_vocab(vocab: &Vocab, params: &rlvr_core::policy::PolicyParams) -> Result<()> {
    if vocab.size() != params.config().vocab_size {
        bail!(
            "vocabulary size {} does not match checkpoint vocab size {}; pass --vocab-tasks with the task kinds the checkpoint was trained on",
            vocab.size(),
            params.config().vocab_size
        );
    }
    Ok(())
}

/// Shared helper for acceptance-style quick evals from other commands.
pub fn quick_eval_path(p: &Path) -> Result<PathBuf> {
    Ok(p.to_path_buf())
}
