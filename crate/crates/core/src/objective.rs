//! Loss mathematics for the three objectives.
//!
//! Shared ingredients:
//!
//! * Group-relative advantages: `A^i = (R^i - mean) / max(std, floor)`
//!   with the population standard deviation over the G rewards of a group.
//! * Response-level entropy threshold: the linear-interpolation rho-quantile
//!   of one response's token entropies. Tokens with entropy at or above the
//!   threshold are reasoning-type, the rest knowledge-type.
//! * Clipped surrogate per token: `min(r * A, clip(r, 1-eps_lo, 1+eps_hi) * A)`
//!   with the importance ratio `r = exp(logp_theta - logp_old)`.
//! * Per-token KL penalty toward the frozen reference, using the
//!   nonnegative estimator `exp(d) - d - 1` with `d = logp_ref - logp_theta`.
//!
//! The objectives differ in clip bounds, KL weights, and aggregation:
//!
//! * `grpo`: symmetric `eps`, uniform `beta`; token terms averaged within
//!   each response, responses averaged within each group, groups averaged.
//! * `dapo`: asymmetric `eps_low`/`eps_high`, no KL; token-level
//!   aggregation `sum(terms) / sum(lengths)`.
//! * `archer`: class-dependent symmetric clip `1 +/- eps(class)` and KL
//!   weight `beta(class)`; token-level aggregation like `dapo`.
//!
//! All losses are negated for the minimizing optimizer.

use crate::tensor::{Tape, TensorError, Var};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid objective config: {0}")]
    BadConfig(String),
    #[error("quantile of an empty list")]
    EmptyEntropies,
    #[error("group must have at least 2 responses, got {0}")]
    GroupTooSmall(usize),
    #[error("response is missing {0} (compute advantages/thresholds first)")]
    MissingField(&'static str),
    #[error("per-token inputs disagree in length: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

/// Which objective drives the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Grpo,
    Dapo,
    Archer,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Grpo => "grpo",
            Algorithm::Dapo => "dapo",
            Algorithm::Archer => "archer",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = ObjectiveError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grpo" => Ok(Algorithm::Grpo),
            "dapo" => Ok(Algorithm::Dapo),
            "archer" => Ok(Algorithm::Archer),
            other => Err(ObjectiveError::BadConfig(format!(
                "unknown algorithm {other:?} (expected grpo, dapo, or archer)"
            ))),
        }
    }
}

/// Entropy-based token type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenClass {
    /// High entropy (at or above the response threshold): logical
    /// connectors and decision points. Gets the looser clip range and the
    /// weaker KL weight.
    Reasoning,
    /// Low entropy: factual/format tokens. Gets the tighter clip range and
    /// the stronger KL weight.
    Knowledge,
}

/// Clip-region label for one token, in the (old prob, new prob) plane.
///
/// `A` is the area inside the knowledge-class window `[1-eps_k, 1+eps_k]`;
/// `E`/`F` are the upper/lower extensions opened for reasoning tokens up to
/// `1 +/- eps_r`; `B`/`C` lie below/above the token's active window. With
/// positive advantage region E supplies extra reward signal; with negative
/// advantage region F applies extra penalty. Knowledge tokens never map to
/// E or F. Every (ratio, class) pair maps to exactly one region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClipRegion {
    A,
    B,
    C,
    E,
    F,
}

impl ClipRegion {
    pub const ALL: [ClipRegion; 5] = [
        ClipRegion::A,
        ClipRegion::B,
        ClipRegion::C,
        ClipRegion::E,
        ClipRegion::F,
    ];

    pub fn index(self) -> usize {
        match self {
            ClipRegion::A => 0,
            ClipRegion::B => 1,
            ClipRegion::C => 2,
            ClipRegion::E => 3,
            ClipRegion::F => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClipRegion::A => "A",
            ClipRegion::B => "B",
            ClipRegion::C => "C",
            ClipRegion::E => "E",
            ClipRegion::F => "F",
        }
    }
}

/// Algorithm selector plus every clip/KL/quantile hyperparameter.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ObjectiveConfig {
    pub algorithm: Algorithm,
    /// GRPO symmetric clip.
    pub eps: f64,
    /// DAPO asymmetric bounds.
    pub eps_low: f64,
    pub eps_high: f64,
    /// Archer per-class symmetric clips; reasoning must be >= knowledge.
    pub eps_reasoning: f64,
    pub eps_knowledge: f64,
    /// GRPO uniform KL weight.
    pub beta: f64,
    /// Archer per-class KL weights; knowledge must be >= reasoning.
    pub beta_reasoning: f64,
    pub beta_knowledge: f64,
    /// Entropy quantile level in (0, 1).
    pub rho: f64,
    /// Floor for the group reward standard deviation.
    pub std_floor: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            algorithm: Algorithm::Archer,
            eps: 0.2,
            eps_low: 0.2,
            eps_high: 0.28,
            eps_reasoning: 0.5,
            eps_knowledge: 0.2,
            beta: 0.001,
            beta_reasoning: 0.0,
            beta_knowledge: 0.001,
            rho: 0.8,
            std_floor: 1e-6,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("eps", self.eps),
            ("eps_low", self.eps_low),
            ("eps_high", self.eps_high),
            ("eps_reasoning", self.eps_reasoning),
            ("eps_knowledge", self.eps_knowledge),
            ("beta", self.beta),
            ("beta_reasoning", self.beta_reasoning),
            ("beta_knowledge", self.beta_knowledge),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(ObjectiveError::BadConfig(format!("{name} must be >= 0")));
            }
        }
        if self.eps_reasoning < self.eps_knowledge {
            return Err(ObjectiveError::BadConfig(
                "eps_reasoning must be >= eps_knowledge (reasoning tokens clip looser)".into(),
            ));
        }
        if self.beta_knowledge < self.beta_reasoning {
            return Err(ObjectiveError::BadConfig(
                "beta_knowledge must be >= beta_reasoning (knowledge tokens regularize harder)"
                    .into(),
            ));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(ObjectiveError::BadConfig("rho must be in (0, 1)".into()));
        }
        if !(self.std_floor > 0.0) {
            return Err(ObjectiveError::BadConfig("std_floor must be > 0".into()));
        }
        Ok(())
    }
}

// ---- scalar building blocks -------------------------------------------------

/// Group-relative advantages with population (divide-by-G) standard
/// deviation, floored to keep zero-variance groups finite.
pub fn group_advantages(rewards: &[f64], std_floor: f64) -> Result<Vec<f64>> {
    let g = rewards.len();
    if g < 2 {
        return Err(ObjectiveError::GroupTooSmall(g));
    }
    let mean = rewards.iter().sum::<f64>() / g as f64;
    let var = rewards.iter().map(|&r| (r - mean) * (r - mean)).sum::<f64>() / g as f64;
    let std = var.sqrt().max(std_floor);
    Ok(rewards.iter().map(|&r| (r - mean) / std).collect())
}

/// Linear-interpolation quantile: sort ascending, `h = (n-1) * rho`,
/// interpolate between the neighbors of `h`.
pub fn entropy_quantile(entropies: &[f64], rho: f64) -> Result<f64> {
    if entropies.is_empty() {
        return Err(ObjectiveError::EmptyEntropies);
    }
    let mut sorted = entropies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite entropies"));
    let h = (sorted.len() - 1) as f64 * rho;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[lo])
    }
}

/// Reasoning iff entropy >= threshold (all-equal responses classify as
/// all-reasoning under the literal rule).
pub fn classify_tokens(entropies: &[f64], tau: f64) -> Vec<TokenClass> {
    entropies
        .iter()
        .map(|&e| {
            if e >= tau {
                TokenClass::Reasoning
            } else {
                TokenClass::Knowledge
            }
        })
        .collect()
}

/// Class-specific clip half-width (archer).
pub fn select_clip(class: TokenClass, cfg: &ObjectiveConfig) -> f64 {
    match class {
        TokenClass::Reasoning => cfg.eps_reasoning,
        TokenClass::Knowledge => cfg.eps_knowledge,
    }
}

/// Class-specific KL weight (archer).
pub fn select_beta(class: TokenClass, cfg: &ObjectiveConfig) -> f64 {
    match class {
        TokenClass::Reasoning => cfg.beta_reasoning,
        TokenClass::Knowledge => cfg.beta_knowledge,
    }
}

/// Clipped-surrogate term for one token:
/// `min(r * adv, clamp(r, 1-eps_low, 1+eps_high) * adv)`.
pub fn surrogate_term(r: f64, advantage: f64, eps_low: f64, eps_high: f64) -> f64 {
    let unclipped = r * advantage;
    let clipped = r.clamp(1.0 - eps_low, 1.0 + eps_high) * advantage;
    unclipped.min(clipped)
}

/// Per-token KL estimate `exp(d) - d - 1`, `d = logp_ref - logp_theta`.
/// Nonnegative; zero exactly when the logprobs agree.
pub fn kl_term(logp_theta: f64, logp_ref: f64) -> f64 {
    let d = logp_ref - logp_theta;
    d.exp() - d - 1.0
}

/// Clip-region label for one token under archer geometry. For grpo/dapo
/// diagnostics, pass the active window as both class widths (E/F vanish).
pub fn clip_region_for(r: f64, class: TokenClass, eps_reasoning: f64, eps_knowledge: f64) -> ClipRegion {
    let (base_lo, base_hi) = (1.0 - eps_knowledge, 1.0 + eps_knowledge);
    if r >= base_lo && r <= base_hi {
        return ClipRegion::A;
    }
    match class {
        TokenClass::Knowledge => {
            if r < base_lo {
                ClipRegion::B
            } else {
                ClipRegion::C
            }
        }
        TokenClass::Reasoning => {
            let (ext_lo, ext_hi) = (1.0 - eps_reasoning, 1.0 + eps_reasoning);
            if r > base_hi && r <= ext_hi {
                ClipRegion::E
            } else if r >= ext_lo && r < base_lo {
                ClipRegion::F
            } else if r < ext_lo {
                ClipRegion::B
            } else {
                ClipRegion::C
            }
        }
    }
}

// ---- batch loss on the tape ---------------------------------------------

/// One response's inputs to a loss: the differentiable current-policy
/// logprobs plus everything frozen at rollout time.
pub struct ResponseTerms<'a> {
    /// `[T]` vector on the tape: log pi_theta(token | prefix).
    pub logp_theta: Var,
    /// Rollout-time logprobs under the sampling snapshot.
    pub logp_old: &'a [f64],
    /// Reference-policy logprobs (empty slice when no objective term uses
    /// them, i.e. every active beta is zero).
    pub logp_ref: &'a [f64],
    /// Group-relative advantage shared by all tokens of the response.
    pub advantage: f64,
    /// Entropy classes, frozen at rollout time.
    pub classes: &'a [TokenClass],
    /// Index of the prompt group this response belongs to.
    pub group: usize,
}

/// Per-token diagnostic record emitted alongside every loss.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TokenLossBreakdown {
    pub group: usize,
    pub ratio: f64,
    pub advantage: f64,
    /// Active clip half-widths for this token; equal for symmetric
    /// objectives.
    pub eps_low_used: f64,
    pub eps_high_used: f64,
    pub beta_used: f64,
    pub surrogate_term: f64,
    pub kl_term: f64,
    /// Ratio outside the active window `[1 - eps_low, 1 + eps_high]`.
    pub clipped: bool,
    pub region: ClipRegion,
    pub token_class: TokenClass,
}

/// Scalar loss (a tape Var, ready for backward) plus per-token diagnostics.
pub struct LossOutput {
    pub loss: Var,
    pub breakdown: Vec<TokenLossBreakdown>,
}

fn check_lengths(tape: &Tape, item: &ResponseTerms) -> Result<usize> {
    let n = tape.value(item.logp_theta).len();
    if n == 0 {
        return Err(ObjectiveError::LengthMismatch("empty response".into()));
    }
    if item.logp_old.len() != n || item.classes.len() != n {
        return Err(ObjectiveError::LengthMismatch(format!(
            "logp_theta {} / logp_old {} / classes {}",
            n,
            item.logp_old.len(),
            item.classes.len()
        )));
    }
    if !item.advantage.is_finite() {
        return Err(ObjectiveError::MissingField("advantage"));
    }
    Ok(n)
}

/// Per-token clip bounds and KL weights for one response under `cfg`.
fn token_params(cfg: &ObjectiveConfig, classes: &[TokenClass]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    match cfg.algorithm {
        Algorithm::Grpo => (
            vec![cfg.eps; classes.len()],
            vec![cfg.eps; classes.len()],
            vec![cfg.beta; classes.len()],
        ),
        Algorithm::Dapo => (
            vec![cfg.eps_low; classes.len()],
            vec![cfg.eps_high; classes.len()],
            vec![0.0; classes.len()],
        ),
        Algorithm::Archer => {
            let eps: Vec<f64> = classes.iter().map(|&c| select_clip(c, cfg)).collect();
            let beta: Vec<f64> = classes.iter().map(|&c| select_beta(c, cfg)).collect();
            (eps.clone(), eps, beta)
        }
    }
}

/// Build one response's per-token term vector
/// `surrogate - beta * kl` on the tape; returns the term Var and the
/// breakdown rows.
fn response_terms_on_tape(
    tape: &mut Tape,
    item: &ResponseTerms,
    cfg: &ObjectiveConfig,
) -> Result<(Var, Vec<TokenLossBreakdown>)> {
    let n = check_lengths(tape, item)?;
    let (eps_lo, eps_hi, beta) = token_params(cfg, item.classes);
    let needs_kl = beta.iter().any(|&b| b > 0.0);
    if needs_kl && item.logp_ref.len() != n {
        return Err(ObjectiveError::MissingField("logp_ref"));
    }

    let old = tape.constant_vec(item.logp_old.to_vec());
    let diff = tape.sub(item.logp_theta, old)?;
    let ratio = tape.exp(diff)?;
    let adv = tape.constant_vec(vec![item.advantage; n]);
    let unclipped = tape.mul(ratio, adv)?;
    let lo_b: Vec<f64> = eps_lo.iter().map(|e| 1.0 - e).collect();
    let hi_b: Vec<f64> = eps_hi.iter().map(|e| 1.0 + e).collect();
    let clipped_ratio = tape.clamp_bounds(ratio, lo_b.clone(), hi_b.clone())?;
    let clipped = tape.mul(clipped_ratio, adv)?;
    let surr = tape.minimum(unclipped, clipped)?;

    let term = if needs_kl {
        let refv = tape.constant_vec(item.logp_ref.to_vec());
        let d = tape.sub(refv, item.logp_theta)?;
        let ed = tape.exp(d)?;
        let e_minus_d = tape.sub(ed, d)?;
        let kl = tape.add_scalar(e_minus_d, -1.0)?;
        let beta_v = tape.constant_vec(beta.clone());
        let weighted = tape.mul(beta_v, kl)?;
        tape.sub(surr, weighted)?
    } else {
        surr
    };

    // Diagnostics from the computed values, via the scalar building blocks.
    let rv = tape.value(ratio).to_vec();
    let mut breakdown = Vec::with_capacity(n);
    for t in 0..n {
        let r = rv[t];
        let kl_t = if needs_kl {
            kl_term(tape.value(item.logp_theta)[t], item.logp_ref[t])
        } else {
            0.0
        };
        breakdown.push(TokenLossBreakdown {
            group: item.group,
            ratio: r,
            advantage: item.advantage,
            eps_low_used: eps_lo[t],
            eps_high_used: eps_hi[t],
            beta_used: beta[t],
            surrogate_term: surrogate_term(r, item.advantage, eps_lo[t], eps_hi[t]),
            kl_term: kl_t,
            clipped: r < lo_b[t] || r > hi_b[t],
            region: match cfg.algorithm {
                Algorithm::Archer => {
                    clip_region_for(r, item.classes[t], cfg.eps_reasoning, cfg.eps_knowledge)
                }
                Algorithm::Grpo => clip_region_for(r, item.classes[t], cfg.eps, cfg.eps),
                // DAPO is asymmetric; label with the active bounds on both
                // sides so A/B/C stay meaningful and E/F never appear.
                Algorithm::Dapo => {
                    if r < lo_b[t] {
                        ClipRegion::B
                    } else if r > hi_b[t] {
                        ClipRegion::C
                    } else {
                        ClipRegion::A
                    }
                }
            },
            token_class: item.classes[t],
        });
    }
    Ok((term, breakdown))
}

/// Token-level aggregation shared by dapo and archer:
/// `loss = -(1 / sum(|o^i|)) * sum_i sum_t term`.
fn token_level_loss(
    tape: &mut Tape,
    items: &[ResponseTerms],
    cfg: &ObjectiveConfig,
) -> Result<LossOutput> {
    if items.is_empty() {
        return Err(ObjectiveError::LengthMismatch("empty batch".into()));
    }
    let mut total: Option<Var> = None;
    let mut total_tokens = 0usize;
    let mut breakdown = Vec::new();
    for item in items {
        let (term, rows) = response_terms_on_tape(tape, item, cfg)?;
        total_tokens += rows.len();
        breakdown.extend(rows);
        let s = tape.sum(term)?;
        total = Some(match total {
            Some(acc) => tape.add(acc, s)?,
            None => s,
        });
    }
    let loss = tape.scale(total.expect("non-empty batch"), -1.0 / total_tokens as f64)?;
    Ok(LossOutput { loss, breakdown })
}

/// The entropy-aware dual-token-constraint objective.
pub fn archer_loss(
    tape: &mut Tape,
    items: &[ResponseTerms],
    cfg: &ObjectiveConfig,
) -> Result<LossOutput> {
    debug_assert_eq!(cfg.algorithm, Algorithm::Archer);
    token_level_loss(tape, items, cfg)
}

/// Token-level DAPO objective (asymmetric clipping, no KL).
pub fn dapo_loss(
    tape: &mut Tape,
    items: &[ResponseTerms],
    cfg: &ObjectiveConfig,
) -> Result<LossOutput> {
    debug_assert_eq!(cfg.algorithm, Algorithm::Dapo);
    token_level_loss(tape, items, cfg)
}

/// Sample-level GRPO objective: token terms are averaged per response,
/// responses per group, groups per batch.
pub fn grpo_loss(
    tape: &mut Tape,
    items: &[ResponseTerms],
    cfg: &ObjectiveConfig,
) -> Result<LossOutput> {
    debug_assert_eq!(cfg.algorithm, Algorithm::Grpo);
    if items.is_empty() {
        return Err(ObjectiveError::LengthMismatch("empty batch".into()));
    }
    let mut breakdown = Vec::new();
    // Response means bucketed by group index (order of first appearance).
    let mut group_ids: Vec<usize> = Vec::new();
    let mut group_sums: Vec<Option<Var>> = Vec::new();
    let mut group_counts: Vec<usize> = Vec::new();
    for item in items {
        let (term, rows) = response_terms_on_tape(tape, item, cfg)?;
        let len = rows.len();
        breakdown.extend(rows);
        let s = tape.sum(term)?;
        let mean = tape.scale(s, 1.0 / len as f64)?;
        let slot = match group_ids.iter().position(|&g| g == item.group) {
            Some(i) => i,
            None => {
                group_ids.push(item.group);
                group_sums.push(None);
                group_counts.push(0);
                group_ids.len() - 1
            }
        };
        group_sums[slot] = Some(match group_sums[slot].take() {
            Some(acc) => tape.add(acc, mean)?,
            None => mean,
        });
        group_counts[slot] += 1;
    }
    let mut batch: Option<Var> = None;
    for (sum, count) in group_sums.into_iter().zip(group_counts) {
        let gm = tape.scale(sum.expect("filled"), 1.0 / count as f64)?;
        batch = Some(match batch {
            Some(acc) => tape.add(acc, gm)?,
            None => gm,
        });
    }
    let loss = tape.scale(batch.expect("non-empty"), -1.0 / group_ids.len() as f64)?;
    Ok(LossOutput { loss, breakdown })
}

/// Dispatch on `cfg.algorithm`.
pub fn loss_on_tape(
    tape: &mut Tape,
    items: &[ResponseTerms],
    cfg: &ObjectiveConfig,
) -> Result<LossOutput> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Grpo => grpo_loss(tape, items, cfg),
        Algorithm::Dapo => dapo_loss(tape, items, cfg),
        Algorithm::Archer => archer_loss(tape, items, cfg),
    }
}
