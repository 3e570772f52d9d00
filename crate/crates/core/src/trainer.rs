//! The training loop.
//!
//! Each step: snapshot the policy, refill a batch of informative prompt
//! groups from the snapshot, attach group-relative advantages and
//! response-level entropy thresholds/classes, then run one epoch of
//! shuffled minibatch updates under the configured objective while the
//! reference policy stays frozen at initialization. Every per-step random
//! decision draws from a seed derived from `(master seed, step)`, so runs
//! are exactly reproducible and sweep runs stay sample-aligned.

use crate::analytics::{AdvantageSign, ClipRegionHistogram};
use crate::envs::{self, ShapingConfig, TaskKind, Vocab};
use crate::objective::{self, Algorithm, ObjectiveConfig, ResponseTerms, TokenClass};
use crate::policy::{
    self, ModelConfig, PolicyParams, RngState, SamplingConfig,
};
use crate::rng::{derive_seed, rng_for, Stream};
use crate::rollout::{self, PromptGroup, RolloutLogRecord};
use crate::tensor::Tape;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::ops::ControlFlow;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid train config: {0}")]
    BadConfig(String),
    #[error("non-finite gradient in {name}; optimizer step refused")]
    NonFiniteGradient { name: String },
    #[error(transparent)]
    Objective(#[from] objective::ObjectiveError),
    #[error(transparent)]
    Policy(#[from] policy::PolicyError),
    #[error(transparent)]
    Rollout(#[from] rollout::RolloutError),
    #[error(transparent)]
    Env(#[from] envs::EnvError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

pub type Result<T> = std::result::Result<T, TrainError>;

/// One task family at one difficulty, drawn uniformly from the mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub difficulty: u32,
}

/// Architecture knobs exposed to configs (vocab size comes from the task
/// mix).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ModelShape {
    pub dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub max_seq_len: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            dim: 64,
            layers: 2,
            heads: 4,
            max_seq_len: 256,
        }
    }
}

/// Rollout sampling knobs; the stop token always comes from the task
/// vocabulary.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RolloutSampling {
    pub temperature: f64,
    pub top_p: f64,
    pub max_new_tokens: usize,
}

impl Default for RolloutSampling {
    fn default() -> Self {
        RolloutSampling {
            temperature: 1.0,
            top_p: 1.0,
            max_new_tokens: 8,
        }
    }
}

/// Full training configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub total_steps: u64,
    /// Informative groups collected per step.
    pub batch_groups: usize,
    /// Responses per minibatch update.
    pub minibatch_responses: usize,
    /// G: responses sampled per prompt.
    pub rollouts_per_prompt: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Optimization epochs over the step's responses.
    pub epochs: usize,
    /// Refill budget = `refill_factor * batch_groups` prompts.
    pub refill_factor: usize,
    /// n for the diagnostic n-gram repetition ratio.
    pub repetition_ngram: usize,
    pub objective: ObjectiveConfig,
    pub sampling: RolloutSampling,
    pub model: ModelShape,
    pub tasks: Vec<TaskSpec>,
    pub shaping: ShapingConfig,
    /// Checkpoint cadence in steps; 0 = final checkpoint only.
    pub checkpoint_every: u64,
    /// Rollout-log cadence in steps; 0 = never.
    pub rollout_log_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            total_steps: 100,
            batch_groups: 8,
            minibatch_responses: 32,
            rollouts_per_prompt: 8,
            learning_rate: 3e-4,
            seed: 0,
            epochs: 1,
            refill_factor: 10,
            repetition_ngram: 4,
            objective: ObjectiveConfig::default(),
            sampling: RolloutSampling::default(),
            model: ModelShape::default(),
            tasks: vec![TaskSpec {
                kind: TaskKind::Addition,
                difficulty: 2,
            }],
            shaping: ShapingConfig::default(),
            checkpoint_every: 0,
            rollout_log_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_groups == 0 {
            return Err(TrainError::BadConfig("batch_groups must be >= 1".into()));
        }
        if self.minibatch_responses == 0 {
            return Err(TrainError::BadConfig(
                "minibatch_responses must be >= 1".into(),
            ));
        }
        if self.rollouts_per_prompt < 2 {
            return Err(TrainError::BadConfig(
                "rollouts_per_prompt must be >= 2 for group-relative advantages".into(),
            ));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(TrainError::BadConfig("learning_rate must be >= 0".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::BadConfig("epochs must be >= 1".into()));
        }
        if self.refill_factor == 0 {
            return Err(TrainError::BadConfig("refill_factor must be >= 1".into()));
        }
        if self.repetition_ngram == 0 {
            return Err(TrainError::BadConfig("repetition_ngram must be >= 1".into()));
        }
        if self.tasks.is_empty() {
            return Err(TrainError::BadConfig("task mix must be non-empty".into()));
        }
        for spec in &self.tasks {
            let (lo, hi) = spec.kind.difficulty_range();
            if spec.difficulty < lo || spec.difficulty > hi {
                return Err(TrainError::BadConfig(format!(
                    "difficulty {} out of range [{lo}, {hi}] for {}",
                    spec.difficulty,
                    spec.kind.name()
                )));
            }
            let prompt_len = match spec.kind {
                TaskKind::Addition | TaskKind::Multiplication => 2 * spec.difficulty as usize + 2,
                TaskKind::Sort | TaskKind::Reverse => spec.difficulty as usize + 2,
            };
            if prompt_len + self.sampling.max_new_tokens > self.model.max_seq_len {
                return Err(TrainError::BadConfig(format!(
                    "max_seq_len {} too small for {} difficulty {} (prompt {} + max_new {})",
                    self.model.max_seq_len,
                    spec.kind.name(),
                    spec.difficulty,
                    prompt_len,
                    self.sampling.max_new_tokens
                )));
            }
        }
        self.objective.validate()?;
        Ok(())
    }

    pub fn vocab(&self) -> Vocab {
        let kinds: Vec<TaskKind> = self.tasks.iter().map(|t| t.kind).collect();
        Vocab::for_tasks(&kinds)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            vocab_size: self.vocab().size(),
            dim: self.model.dim,
            layers: self.model.layers,
            heads: self.model.heads,
            max_seq_len: self.model.max_seq_len,
        }
    }

    pub fn sampling_config(&self, vocab: &Vocab) -> SamplingConfig {
        SamplingConfig {
            temperature: self.sampling.temperature,
            top_p: self.sampling.top_p,
            max_new_tokens: self.sampling.max_new_tokens,
            stop_token: vocab.stop_token(),
            greedy: false,
        }
    }
}

/// Per-step training diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepReport {
    pub step: u64,
    /// Mean reward over every response sampled this step, dropped groups
    /// included.
    pub mean_reward: f64,
    pub kept_groups: usize,
    pub dropped_groups: usize,
    pub prompts_consumed: usize,
    /// Token-weighted mean rollout entropy over everything sampled.
    pub mean_entropy: f64,
    /// Mean per-response n-gram repetition ratio over everything sampled.
    pub repetition_ratio: f64,
    pub loss: f64,
    pub grad_norm: f64,
    /// Fraction of kept tokens classified reasoning.
    pub reasoning_fraction: f64,
    pub regions: ClipRegionHistogram,
    /// True when the refill budget produced no informative group and the
    /// update was skipped.
    pub skipped: bool,
}

impl StepReport {
    pub fn csv_header() -> &'static str {
        "step,mean_reward,kept_groups,dropped_groups,prompts_consumed,mean_entropy,repetition_ratio,loss,grad_norm,reasoning_fraction,region_a,region_b,region_c,region_e,region_f,skipped"
    }

    pub fn to_csv_row(&self) -> String {
        use crate::objective::ClipRegion;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.mean_reward,
            self.kept_groups,
            self.dropped_groups,
            self.prompts_consumed,
            self.mean_entropy,
            self.repetition_ratio,
            self.loss,
            self.grad_norm,
            self.reasoning_fraction,
            self.regions.region_total(ClipRegion::A),
            self.regions.region_total(ClipRegion::B),
            self.regions.region_total(ClipRegion::C),
            self.regions.region_total(ClipRegion::E),
            self.regions.region_total(ClipRegion::F),
            self.skipped,
        )
    }
}

/// Callbacks driven by [`train`]. All have no-op defaults.
pub trait TrainObserver {
    /// After every step. Return `ControlFlow::Break(())` to stop early
    /// (the final checkpoint is still emitted).
    fn on_step(&mut self, _report: &StepReport, _params: &PolicyParams) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }

    /// Prepared rollout records at the configured cadence.
    fn on_rollout_log(&mut self, _step: u64, _records: &[RolloutLogRecord]) {}

    /// Checkpoints at the configured cadence plus the final one.
    fn on_checkpoint(&mut self, _step: u64, _params: &PolicyParams, _rng: RngState) {}

    /// Non-fatal conditions (skipped steps).
    fn on_warning(&mut self, _step: u64, _message: &str) {}
}

/// Observer that does nothing.
pub struct NullObserver;

impl TrainObserver for NullObserver {}

/// Everything a finished (or stopped) run returns.
pub struct TrainOutcome {
    pub params: PolicyParams,
    /// The frozen reference policy (identical to initialization).
    pub reference: PolicyParams,
    pub reports: Vec<StepReport>,
    pub completed_steps: u64,
}

// ---- Adam ------------------------------------------------------------------

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First/second moment buffers aligned with the parameter order.
pub struct AdamState {
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &PolicyParams) -> AdamState {
        let sizes: Vec<usize> = params.named_tensors().iter().map(|(_, t)| t.numel()).collect();
        AdamState {
            t: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update on a flat slice.
fn adam_update(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
) {
    let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
    for i in 0..p.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

/// Apply one Adam step from the gradients accumulated in `params`.
/// A missing grad buffer counts as zero; any non-finite gradient refuses
/// the whole step.
pub fn optimizer_step(
    params: &mut PolicyParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    for (name, t) in params.named_tensors() {
        if let Some(g) = t.grad() {
            if g.iter().any(|x| !x.is_finite()) {
                return Err(TrainError::NonFiniteGradient { name });
            }
        }
    }
    state.t += 1;
    let t = state.t;
    for (i, (_, tensor)) in params.named_tensors_mut().into_iter().enumerate() {
        let n = tensor.numel();
        let g: Vec<f64> = match tensor.grad() {
            Some(g) => g.to_vec(),
            None => vec![0.0; n],
        };
        adam_update(tensor.data_mut(), &g, &mut state.m[i], &mut state.v[i], t, lr);
    }
    Ok(())
}

// ---- step preparation --------------------------------------------------------

/// A response flattened out of its group with everything the loss needs.
struct PreparedResponse {
    group: usize,
    prompt: Vec<u32>,
    tokens: Vec<u32>,
    logp_old: Vec<f64>,
    logp_ref: Vec<f64>,
    advantage: f64,
    classes: Vec<TokenClass>,
}

/// Attach advantages, entropy thresholds, and token classes to every kept
/// group (in place), per the configured objective.
pub fn prepare_groups(groups: &mut [PromptGroup], cfg: &ObjectiveConfig) -> Result<()> {
    for group in groups.iter_mut() {
        let rewards: Vec<f64> = group.responses.iter().map(|r| r.reward).collect();
        let advantages = objective::group_advantages(&rewards, cfg.std_floor)?;
        for (resp, adv) in group.responses.iter_mut().zip(advantages) {
            let entropies = resp.entropies();
            let tau = objective::entropy_quantile(&entropies, cfg.rho)?;
            let classes = objective::classify_tokens(&entropies, tau);
            resp.advantage = Some(adv);
            resp.entropy_threshold = Some(tau);
            for (step, class) in resp.steps.iter_mut().zip(classes) {
                step.token_class = Some(class);
            }
        }
    }
    Ok(())
}

fn kl_active(cfg: &ObjectiveConfig) -> bool {
    match cfg.algorithm {
        Algorithm::Grpo => cfg.beta > 0.0,
        Algorithm::Dapo => false,
        Algorithm::Archer => cfg.beta_reasoning > 0.0 || cfg.beta_knowledge > 0.0,
    }
}

fn flatten_groups(
    groups: &[PromptGroup],
    reference: &PolicyParams,
    cfg: &TrainConfig,
) -> Result<Vec<PreparedResponse>> {
    let needs_ref = kl_active(&cfg.objective);
    let temperature = cfg.sampling.temperature;
    let mut flat: Vec<(usize, &PromptGroup, &rollout::ResponseRecord)> = Vec::new();
    for (gi, group) in groups.iter().enumerate() {
        for resp in &group.responses {
            flat.push((gi, group, resp));
        }
    }
    flat.into_par_iter()
        .map(|(gi, group, resp)| {
            let tokens = resp.tokens();
            let logp_ref = if needs_ref {
                policy::logprobs_under(reference, &group.instance.prompt, &tokens, temperature)?
            } else {
                Vec::new()
            };
            Ok(PreparedResponse {
                group: gi,
                prompt: group.instance.prompt.clone(),
                tokens,
                logp_old: resp.logprobs_old(),
                logp_ref,
                advantage: resp.advantage.ok_or(objective::ObjectiveError::MissingField(
                    "advantage",
                ))?,
                classes: resp
                    .classes()
                    .ok_or(objective::ObjectiveError::MissingField("token_class"))?,
            })
        })
        .collect()
}

/// One minibatch update: forward the current policy over each response,
/// assemble the objective, backprop, and apply Adam. Returns
/// `(loss, grad_norm, histogram, reasoning_tokens, total_tokens)`.
fn minibatch_update(
    params: &mut PolicyParams,
    adam: &mut AdamState,
    responses: &[&PreparedResponse],
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
) -> Result<(f64, f64, ClipRegionHistogram, usize, usize)> {
    let mut tape = Tape::new();
    let pv = policy::register_params(&mut tape, params);
    let mut items = Vec::with_capacity(responses.len());
    for r in responses {
        let logp_theta = policy::logprobs_under_vars(
            &mut tape,
            &pv,
            model_cfg,
            &r.prompt,
            &r.tokens,
            cfg.sampling.temperature,
        )?;
        items.push(ResponseTerms {
            logp_theta,
            logp_old: &r.logp_old,
            logp_ref: &r.logp_ref,
            advantage: r.advantage,
            classes: &r.classes,
            group: r.group,
        });
    }
    let out = objective::loss_on_tape(&mut tape, &items, &cfg.objective)?;
    let loss_value = tape.value(out.loss)[0];
    tape.backward(out.loss)?;
    params.zero_grads();
    params.accumulate_from_tape(&tape, &pv)?;
    let grad_norm = params.grad_l2_norm();
    optimizer_step(params, adam, cfg.learning_rate)?;
    params.zero_grads();

    let mut hist = ClipRegionHistogram::default();
    let mut reasoning = 0usize;
    for b in &out.breakdown {
        hist.record(b.region, b.token_class, AdvantageSign::of(b.advantage));
        if b.token_class == TokenClass::Reasoning {
            reasoning += 1;
        }
    }
    Ok((loss_value, grad_norm, hist, reasoning, out.breakdown.len()))
}

/// Run Algorithm-style training: returns the final parameters, the frozen
/// reference, and the per-step report stream.
pub fn train(cfg: &TrainConfig, observer: &mut dyn TrainObserver) -> Result<TrainOutcome> {
    cfg.validate()?;
    let vocab = cfg.vocab();
    let model_cfg = cfg.model_config();
    let sampling = cfg.sampling_config(&vocab);
    let mut params = PolicyParams::init(&model_cfg, derive_seed(cfg.seed, Stream::Init, 0, 0))?;
    let reference = params.clone();
    let mut adam = AdamState::new(&params);
    let mut reports = Vec::new();
    let mut completed = 0u64;

    for step in 0..cfg.total_steps {
        let params_old = params.clone();
        let budget = cfg.refill_factor * cfg.batch_groups;
        let generator = |attempt: usize| -> rollout::Result<PromptGroup> {
            let mut task_rng = rng_for(cfg.seed, Stream::Task, step, attempt as u64);
            let spec = cfg.tasks[task_rng.gen_range(0..cfg.tasks.len())];
            let instance_seed: u64 = task_rng.gen();
            let instance =
                envs::generate_instance(&vocab, spec.kind, spec.difficulty, instance_seed)?;
            rollout::rollout_group(
                &vocab,
                &instance,
                &params_old,
                cfg.rollouts_per_prompt,
                &sampling,
                &cfg.shaping,
                derive_seed(cfg.seed, Stream::Rollout, step, attempt as u64),
            )
        };
        let refilled = rollout::refill_to_batch(
            cfg.batch_groups,
            budget,
            cfg.repetition_ngram,
            generator,
        );
        let (mut groups, stats) = match refilled {
            Ok(pair) => pair,
            Err(rollout::RolloutError::UnlearnableBatch { budget, stats }) => {
                let report = StepReport {
                    step,
                    mean_reward: stats.mean_reward(),
                    kept_groups: 0,
                    dropped_groups: stats.groups_dropped,
                    prompts_consumed: stats.prompts_consumed,
                    mean_entropy: stats.mean_entropy(),
                    repetition_ratio: stats.mean_repetition(),
                    loss: 0.0,
                    grad_norm: 0.0,
                    reasoning_fraction: 0.0,
                    regions: ClipRegionHistogram::default(),
                    skipped: true,
                };
                observer.on_warning(
                    step,
                    &format!(
                        "step {step}: refill budget of {budget} prompts produced no informative group; step skipped"
                    ),
                );
                let flow = observer.on_step(&report, &params);
                reports.push(report);
                completed = step + 1;
                if flow == ControlFlow::Break(()) {
                    break;
                }
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        prepare_groups(&mut groups, &cfg.objective)?;
        let prepared = flatten_groups(&groups, &reference, cfg)?;

        let mut order: Vec<usize> = (0..prepared.len()).collect();
        let mut shuffle_rng = rng_for(cfg.seed, Stream::Shuffle, step, 0);
        let mut loss_sum = 0.0;
        let mut grad_sum = 0.0;
        let mut updates = 0usize;
        let mut hist = ClipRegionHistogram::default();
        let mut reasoning_tokens = 0usize;
        let mut total_tokens = 0usize;
        for _epoch in 0..cfg.epochs {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(cfg.minibatch_responses) {
                let batch: Vec<&PreparedResponse> = chunk.iter().map(|&i| &prepared[i]).collect();
                let (loss, gnorm, h, reas, total) =
                    minibatch_update(&mut params, &mut adam, &batch, cfg, &model_cfg)?;
                loss_sum += loss;
                grad_sum += gnorm;
                updates += 1;
                hist.merge(&h);
                reasoning_tokens += reas;
                total_tokens += total;
            }
        }

        let report = StepReport {
            step,
            mean_reward: stats.mean_reward(),
            kept_groups: groups.len(),
            dropped_groups: stats.groups_dropped,
            prompts_consumed: stats.prompts_consumed,
            mean_entropy: stats.mean_entropy(),
            repetition_ratio: stats.mean_repetition(),
            loss: loss_sum / updates as f64,
            grad_norm: grad_sum / updates as f64,
            reasoning_fraction: if total_tokens == 0 {
                0.0
            } else {
                reasoning_tokens as f64 / total_tokens as f64
            },
            regions: hist,
            skipped: false,
        };

        if cfg.rollout_log_every > 0 && step % cfg.rollout_log_every == 0 {
            let records = rollout::log_records_for_step(step, &groups);
            observer.on_rollout_log(step, &records);
        }
        if cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 {
            observer.on_checkpoint(
                step + 1,
                &params,
                RngState {
                    master_seed: cfg.seed,
                    next_step: step + 1,
                },
            );
        }
        let flow = observer.on_step(&report, &params);
        reports.push(report);
        completed = step + 1;
        if flow == ControlFlow::Break(()) {
            break;
        }
    }

    observer.on_checkpoint(
        completed,
        &params,
        RngState {
            master_seed: cfg.seed,
            next_step: completed,
        },
    );
    Ok(TrainOutcome {
        params,
        reference,
        reports,
        completed_steps: completed,
    })
}

// ---- ablation sweeps -----------------------------------------------------

/// Hyperparameter axes exposed to sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BetaKnowledge,
    EpsKnowledge,
    EpsReasoning,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::BetaKnowledge => "beta_knowledge",
            SweepAxis::EpsKnowledge => "eps_knowledge",
            SweepAxis::EpsReasoning => "eps_reasoning",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = TrainError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta_knowledge" => Ok(SweepAxis::BetaKnowledge),
            "eps_knowledge" => Ok(SweepAxis::EpsKnowledge),
            "eps_reasoning" => Ok(SweepAxis::EpsReasoning),
            other => Err(TrainError::BadConfig(format!(
                "unknown sweep axis {other:?} (expected beta_knowledge, eps_knowledge, or eps_reasoning)"
            ))),
        }
    }
}

/// A copy of `base` with one axis overridden.
pub fn apply_axis(base: &TrainConfig, axis: SweepAxis, value: f64) -> TrainConfig {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::BetaKnowledge => cfg.objective.beta_knowledge = value,
        SweepAxis::EpsKnowledge => cfg.objective.eps_knowledge = value,
        SweepAxis::EpsReasoning => cfg.objective.eps_reasoning = value,
    }
    cfg
}

/// One sweep member's aligned report stream.
pub struct SweepRun {
    pub value: f64,
    pub reports: Vec<StepReport>,
}

/// Run `train` once per value with the shared master seed, so the runs are
/// sample-aligned until the policies diverge.
pub fn ablation_sweep(
    base: &TrainConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRun>> {
    if values.is_empty() {
        return Err(TrainError::BadConfig("sweep values must be non-empty".into()));
    }
    let mut runs = Vec::with_capacity(values.len());
    for &value in values {
        let cfg = apply_axis(base, axis, value);
        let outcome = train(&cfg, &mut NullObserver)?;
        runs.push(SweepRun {
            value,
            reports: outcome.reports,
        });
    }
    Ok(runs)
}
