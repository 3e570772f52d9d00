//! Group rollouts with dynamic sampling.
//!
//! For each prompt, G responses are sampled from the rollout-time policy
//! snapshot; every token carries its rollout logprob and entropy, and every
//! response its verifier reward. Groups whose responses are all correct or
//! all incorrect carry no group-relative signal, so the dynamic-sampling
//! filter drops them and [`refill_to_batch`] keeps sampling new prompts
//! (within a bounded budget) until enough informative groups are collected.
//!
//! Advantages, entropy thresholds, and token classes are attached later by
//! the trainer via the objective module; the rollout log format here
//! carries them once filled.

use crate::envs::{self, ShapingConfig, TaskInstance, Vocab};
use crate::objective::TokenClass;
use crate::policy::{self, PolicyParams, SamplingConfig};
use crate::rng::{derive_seed, Stream};
use rayon::prelude::*;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("group size must be >= 2, got {0}")]
    GroupTooSmall(usize),
    #[error("refill budget of {budget} prompts exhausted with zero informative groups (all-correct or all-incorrect everywhere)")]
    UnlearnableBatch { budget: usize, stats: RefillStats },
    #[error(transparent)]
    Policy(#[from] policy::PolicyError),
    #[error(transparent)]
    Env(#[from] envs::EnvError),
    #[error("rollout log line {line}: {detail}")]
    BadLogRecord { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RolloutError>;

/// One generated token with its rollout-time statistics. The class is
/// assigned by the objective module once the response threshold is known.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenStep {
    pub token: u32,
    pub logprob_old: f64,
    pub entropy: f64,
    pub token_class: Option<TokenClass>,
}

/// A full sampled response. `advantage` and `entropy_threshold` are filled
/// by the trainer before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRecord {
    pub steps: Vec<TokenStep>,
    pub reward: f64,
    pub correct: bool,
    pub truncated: bool,
    pub advantage: Option<f64>,
    pub entropy_threshold: Option<f64>,
}

impl ResponseRecord {
    pub fn tokens(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.token).collect()
    }

    pub fn logprobs_old(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.logprob_old).collect()
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.entropy).collect()
    }

    pub fn classes(&self) -> Option<Vec<TokenClass>> {
        self.steps.iter().map(|s| s.token_class).collect()
    }
}

/// A prompt with its G sampled responses.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptGroup {
    pub instance: TaskInstance,
    pub responses: Vec<ResponseRecord>,
}

impl PromptGroup {
    pub fn correct_count(&self) -> usize {
        self.responses.iter().filter(|r| r.correct).count()
    }
}

/// Sample G responses for one prompt from the rollout policy snapshot and
/// score them. Per-response seeds derive from `seed`, so the group is
/// reproducible as a unit.
pub fn rollout_group(
    vocab: &Vocab,
    instance: &TaskInstance,
    params_old: &PolicyParams,
    group_size: usize,
    sampling: &SamplingConfig,
    shaping: &ShapingConfig,
    seed: u64,
) -> Result<PromptGroup> {
    if group_size < 2 {
        return Err(RolloutError::GroupTooSmall(group_size));
    }
    let mut responses = Vec::with_capacity(group_size);
    for i in 0..group_size {
        let response_seed = derive_seed(seed, Stream::Rollout, 0, i as u64);
        let sampled = policy::sample_response(params_old, &instance.prompt, sampling, response_seed)?;
        let mut full = instance.prompt.clone();
        full.extend_from_slice(&sampled.tokens);
        let outcome = envs::reward(
            vocab,
            &full,
            sampled.tokens.len(),
            &instance.ground_truth,
            sampled.truncated,
            shaping,
        );
        let steps = sampled
            .tokens
            .iter()
            .zip(&sampled.logprobs)
            .zip(&sampled.entropies)
            .map(|((&token, &logprob_old), &entropy)| TokenStep {
                token,
                logprob_old,
                entropy,
                token_class: None,
            })
            .collect();
        responses.push(ResponseRecord {
            steps,
            reward: outcome.reward,
            correct: outcome.correct,
            truncated: sampled.truncated,
            advantage: None,
            entropy_threshold: None,
        });
    }
    Ok(PromptGroup {
        instance: instance.clone(),
        responses,
    })
}

/// Keep a group iff its correct-count c satisfies `0 < c < G`. Order
/// preserved; returns the dropped count.
pub fn dynamic_sampling_filter(groups: Vec<PromptGroup>) -> (Vec<PromptGroup>, usize) {
    let total = groups.len();
    let kept: Vec<PromptGroup> = groups
        .into_iter()
        .filter(|g| {
            let c = g.correct_count();
            c > 0 && c < g.responses.len()
        })
        .collect();
    let dropped = total - kept.len();
    (kept, dropped)
}

/// Aggregate statistics over everything sampled during a refill, including
/// the dropped groups.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RefillStats {
    pub prompts_consumed: usize,
    pub groups_dropped: usize,
    pub responses_sampled: usize,
    pub reward_sum: f64,
    pub correct_count: usize,
    pub entropy_sum: f64,
    pub token_count: usize,
    /// Sum over responses of their n-gram repetition ratio (the n used is
    /// the `diagnostic_ngram` passed to [`refill_to_batch`]).
    pub repetition_sum: f64,
}

impl RefillStats {
    pub fn mean_reward(&self) -> f64 {
        if self.responses_sampled == 0 {
            0.0
        } else {
            self.reward_sum / self.responses_sampled as f64
        }
    }

    /// Token-weighted mean entropy over everything sampled.
    pub fn mean_entropy(&self) -> f64 {
        if self.token_count == 0 {
            0.0
        } else {
            self.entropy_sum / self.token_count as f64
        }
    }

    pub fn mean_repetition(&self) -> f64 {
        if self.responses_sampled == 0 {
            0.0
        } else {
            self.repetition_sum / self.responses_sampled as f64
        }
    }

    fn absorb(&mut self, group: &PromptGroup, diagnostic_ngram: usize) {
        self.responses_sampled += group.responses.len();
        for r in &group.responses {
            self.reward_sum += r.reward;
            self.correct_count += usize::from(r.correct);
            self.token_count += r.steps.len();
            self.entropy_sum += r.steps.iter().map(|s| s.entropy).sum::<f64>();
            self.repetition_sum +=
                crate::analytics::repetition_ratio(&r.tokens(), diagnostic_ngram);
        }
    }
}

/// Sample prompt groups until `batch_target` pass the dynamic-sampling
/// filter or `attempt_budget` prompts have been consumed. The generator is
/// called with a dense attempt index, so results are deterministic
/// regardless of scheduling; generation within one wave runs in parallel.
/// `diagnostic_ngram` sets the n for the per-response repetition ratio
/// folded into the stats.
///
/// Returns fewer than `batch_target` groups when the budget runs out;
/// errors only if the budget produced no informative group at all.
pub fn refill_to_batch<F>(
    batch_target: usize,
    attempt_budget: usize,
    diagnostic_ngram: usize,
    generator: F,
) -> Result<(Vec<PromptGroup>, RefillStats)>
where
    F: Fn(usize) -> Result<PromptGroup> + Sync,
{
    let mut kept: Vec<PromptGroup> = Vec::with_capacity(batch_target);
    let mut stats = RefillStats::default();
    let mut next_attempt = 0usize;
    while kept.len() < batch_target && next_attempt < attempt_budget {
        let want = (batch_target - kept.len()).min(attempt_budget - next_attempt);
        let wave: Vec<Result<PromptGroup>> = (next_attempt..next_attempt + want)
            .into_par_iter()
            .map(&generator)
            .collect();
        next_attempt += want;
        stats.prompts_consumed += want;
        for g in wave {
            let g = g?;
            stats.absorb(&g, diagnostic_ngram);
            let c = g.correct_count();
            if c > 0 && c < g.responses.len() {
                kept.push(g);
            } else {
                stats.groups_dropped += 1;
            }
        }
    }
    if kept.is_empty() {
        return Err(RolloutError::UnlearnableBatch {
            budget: attempt_budget,
            stats,
        });
    }
    Ok((kept, stats))
}

// ---- rollout log -----------------------------------------------------------

/// One line of the rollout log: a single response with everything the
/// analytics pipeline needs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RolloutLogRecord {
    pub step: u64,
    pub prompt_id: u64,
    pub response_index: u32,
    /// Prompt token ids, kept so responses can be re-scored offline.
    #[serde(default)]
    pub prompt_tokens: Vec<u32>,
    pub tokens: Vec<u32>,
    pub logprobs_old: Vec<f64>,
    pub entropies: Vec<f64>,
    pub reward: f64,
    pub correct: bool,
    pub truncated: bool,
    pub advantage: f64,
    pub entropy_threshold: f64,
    pub token_classes: Vec<TokenClass>,
}

/// Flatten prepared groups (advantages/thresholds/classes filled) into log
/// records for one training step.
pub fn log_records_for_step(step: u64, groups: &[PromptGroup]) -> Vec<RolloutLogRecord> {
    let mut out = Vec::new();
    for (prompt_id, group) in groups.iter().enumerate() {
        for (response_index, r) in group.responses.iter().enumerate() {
            out.push(RolloutLogRecord {
                step,
                prompt_id: prompt_id as u64,
                response_index: response_index as u32,
                prompt_tokens: group.instance.prompt.clone(),
                tokens: r.tokens(),
                logprobs_old: r.logprobs_old(),
                entropies: r.entropies(),
                reward: r.reward,
                correct: r.correct,
                truncated: r.truncated,
                advantage: r.advantage.unwrap_or(f64::NAN),
                entropy_threshold: r.entropy_threshold.unwrap_or(f64::NAN),
                token_classes: r.classes().unwrap_or_default(),
            });
        }
    }
    out
}

pub fn write_log_records<W: Write>(w: &mut W, records: &[RolloutLogRecord]) -> Result<()> {
    for rec in records {
        let line = serde_json::to_string(rec).expect("serializable record");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_log_records<R: BufRead>(r: R) -> Result<Vec<RolloutLogRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RolloutLogRecord =
            serde_json::from_str(&line).map_err(|e| RolloutError::BadLogRecord {
                line: i + 1,
                detail: e.to_string(),
            })?;
        out.push(rec);
    }
    Ok(out)
}
