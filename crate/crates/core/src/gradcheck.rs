//! Finite-difference verification of the objective gradients.
//!
//! Builds a small but fully realistic batch: rollouts sampled from a
//! snapshot policy, synthetic group rewards with nonzero variance, entropy
//! thresholds and token classes attached, and a slightly perturbed current
//! policy so importance ratios spread around 1 and both clipped and
//! unclipped branches are exercised. Every parameter coordinate is then
//! checked against central finite differences of the scalar loss.
//!
//! The ratio clip boundary and the surrogate min are kinks; a batch whose
//! ratios sit within `boundary_margin` of a bound is rejected and rebuilt
//! from the next seed, so the comparison never straddles a kink.

use crate::envs::{ShapingConfig, TaskKind, Vocab};
use crate::objective::{Algorithm, ObjectiveConfig, ResponseTerms};
use crate::policy::{self, ModelConfig, PolicyParams};
use crate::rng::{derive_seed, rng_for, Stream};
use crate::rollout;
use crate::tensor::Tape;
use crate::trainer::{self, TrainError};
use rand::Rng;
use rayon::prelude::*;

pub type Result<T> = std::result::Result<T, TrainError>;

/// Tolerances and fixture sizes for one check.
#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    pub seed: u64,
    /// Std of the Gaussian offset applied to the current policy.
    pub perturbation_scale: f64,
    /// Central-difference step.
    pub fd_step: f64,
    /// Relative tolerance of the comparison.
    pub rtol: f64,
    /// Absolute floor below which differences are ignored.
    pub atol: f64,
    /// Minimum distance of every ratio from its clip bounds.
    pub boundary_margin: f64,
    pub prompts: usize,
    pub group_size: usize,
    pub max_new_tokens: usize,
    pub model: ModelConfig,
    /// Test hook: corrupt one analytic gradient entry so the check must
    /// fail. Never set outside negative-control tests.
    pub corrupt: bool,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            seed: 0,
            perturbation_scale: 0.02,
            fd_step: 1e-5,
            rtol: 1e-4,
            atol: 1e-8,
            boundary_margin: 1e-3,
            prompts: 2,
            group_size: 4,
            max_new_tokens: 12,
            model: ModelConfig {
                vocab_size: Vocab::for_tasks(&[TaskKind::Addition]).size(),
                dim: 32,
                layers: 1,
                heads: 2,
                max_seq_len: 32,
            },
            corrupt: false,
        }
    }
}

/// Outcome of checking one objective.
#[derive(Debug, Clone)]
pub struct GradCheckResult {
    pub algorithm: Algorithm,
    pub params_checked: usize,
    pub max_rel_err: f64,
    pub worst_param: String,
    pub passed: bool,
    pub seconds: f64,
}

struct Fixture {
    theta: PolicyParams,
    items: Vec<PreparedItem>,
    objective: ObjectiveConfig,
}

/// One response with everything frozen (old/ref logprobs, advantage,
/// classes) so FD evals touch only the current policy's forward.
struct PreparedItem {
    group: usize,
    prompt: Vec<u32>,
    tokens: Vec<u32>,
    logp_old: Vec<f64>,
    logp_ref: Vec<f64>,
    advantage: f64,
    classes: Vec<crate::objective::TokenClass>,
}

/// Objective settings exercised for each algorithm: GRPO with an active
/// KL term, DAPO with the asymmetric bounds, archer with its defaults.
pub fn objective_for(algorithm: Algorithm) -> ObjectiveConfig {
    match algorithm {
        Algorithm::Grpo => ObjectiveConfig {
            algorithm,
            eps: 0.2,
            beta: 0.01,
            ..ObjectiveConfig::default()
        },
        Algorithm::Dapo => ObjectiveConfig {
            algorithm,
            eps_low: 0.2,
            eps_high: 0.28,
            ..ObjectiveConfig::default()
        },
        Algorithm::Archer => ObjectiveConfig {
            algorithm,
            ..ObjectiveConfig::default()
        },
    }
}

/// Loss of `theta` on the prepared batch, on a fresh tape. Shared by the
/// analytic and finite-difference paths so they evaluate identical code.
fn batch_loss(
    theta: &PolicyParams,
    items: &[PreparedItem],
    objective: &ObjectiveConfig,
    temperature: f64,
    tape: &mut Tape,
) -> Result<(crate::tensor::Var, policy::ParamVars)> {
    let pv = policy::register_params(tape, theta);
    let model_cfg = theta.config().clone();
    let mut vars = Vec::with_capacity(items.len());
    for item in items {
        vars.push(policy::logprobs_under_vars(
            tape,
            &pv,
            &model_cfg,
            &item.prompt,
            &item.tokens,
            temperature,
        )?);
    }
    let terms: Vec<ResponseTerms> = items
        .iter()
        .zip(&vars)
        .map(|(item, &v)| ResponseTerms {
            logp_theta: v,
            logp_old: &item.logp_old,
            logp_ref: &item.logp_ref,
            advantage: item.advantage,
            classes: &item.classes,
            group: item.group,
        })
        .collect();
    let out = crate::objective::loss_on_tape(tape, &terms, objective)?;
    Ok((out.loss, pv))
}

/// Build a batch whose ratios all clear the boundary margin; bumps the
/// seed deterministically until one qualifies.
fn build_fixture(objective: &ObjectiveConfig, cfg: &GradCheckConfig) -> Result<Fixture> {
    let vocab = Vocab::for_tasks(&[TaskKind::Addition]);
    let objective = objective.clone();
    let sampling = policy::SamplingConfig {
        temperature: 1.0,
        top_p: 1.0,
        max_new_tokens: cfg.max_new_tokens,
        stop_token: vocab.stop_token(),
        greedy: false,
    };
    for attempt in 0..64u64 {
        let seed = cfg.seed.wrapping_add(attempt);
        let old = PolicyParams::init(&cfg.model, derive_seed(seed, Stream::Init, 0, 0))?;
        let mut theta = old.clone();
        let mut rng = rng_for(seed, Stream::Init, 1, 0);
        for (_, t) in theta.named_tensors_mut() {
            for x in t.data_mut() {
                *x += (rng.gen::<f64>() * 2.0 - 1.0) * cfg.perturbation_scale;
            }
        }
        let mut groups = Vec::with_capacity(cfg.prompts);
        for p in 0..cfg.prompts {
            let instance = crate::envs::generate_instance(
                &vocab,
                TaskKind::Addition,
                2,
                derive_seed(seed, Stream::Task, 0, p as u64),
            )?;
            let mut group = rollout::rollout_group(
                &vocab,
                &instance,
                &old,
                cfg.group_size,
                &sampling,
                &ShapingConfig::default(),
                derive_seed(seed, Stream::Rollout, 0, p as u64),
            )?;
            // Synthetic rewards with guaranteed variance so advantages are
            // meaningfully nonzero regardless of model quality.
            let mut reward_rng = rng_for(seed, Stream::Task, 1, p as u64);
            for r in &mut group.responses {
                r.reward = reward_rng.gen::<f64>();
            }
            groups.push(group);
        }
        trainer::prepare_groups(&mut groups, &objective)?;

        // Margin check on every ratio against its active clip bounds.
        let clear = {
            let mut ok = true;
            'outer: for group in &groups {
                for resp in &group.responses {
                    let tokens = resp.tokens();
                    let logp_theta =
                        policy::logprobs_under(&theta, &group.instance.prompt, &tokens, 1.0)?;
                    for (t, (lp_t, lp_o)) in
                        logp_theta.iter().zip(resp.logprobs_old()).enumerate()
                    {
                        let r = (lp_t - lp_o).exp();
                        let class = resp.steps[t].token_class.expect("prepared");
                        let (eps_lo, eps_hi) = match objective.algorithm {
                            Algorithm::Grpo => (objective.eps, objective.eps),
                            Algorithm::Dapo => (objective.eps_low, objective.eps_high),
                            Algorithm::Archer => {
                                let e = crate::objective::select_clip(class, &objective);
                                (e, e)
                            }
                        };
                        for bound in [1.0 - eps_lo, 1.0 + eps_hi] {
                            if (r - bound).abs() < cfg.boundary_margin {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            ok
        };
        if clear {
            let reference =
                PolicyParams::init(&cfg.model, derive_seed(cfg.seed, Stream::Init, 2, 0))?;
            let mut items = Vec::new();
            for (gi, group) in groups.iter().enumerate() {
                for resp in &group.responses {
                    let tokens = resp.tokens();
                    let logp_ref = policy::logprobs_under(
                        &reference,
                        &group.instance.prompt,
                        &tokens,
                        1.0,
                    )?;
                    items.push(PreparedItem {
                        group: gi,
                        prompt: group.instance.prompt.clone(),
                        tokens,
                        logp_old: resp.logprobs_old(),
                        logp_ref,
                        advantage: resp.advantage.expect("prepared"),
                        classes: resp.classes().expect("prepared"),
                    });
                }
            }
            return Ok(Fixture {
                theta,
                items,
                objective,
            });
        }
    }
    Err(TrainError::BadConfig(
        "no boundary-clear gradcheck batch found in 64 seeds".into(),
    ))
}

/// Check one objective's parameter gradients against central finite
/// differences, using [`objective_for`]'s settings for the algorithm.
pub fn gradcheck_objective(algorithm: Algorithm, cfg: &GradCheckConfig) -> Result<GradCheckResult> {
    gradcheck_with(&objective_for(algorithm), cfg)
}

/// Gradient check under an explicit objective configuration.
pub fn gradcheck_with(objective: &ObjectiveConfig, cfg: &GradCheckConfig) -> Result<GradCheckResult> {
    let start = std::time::Instant::now();
    let algorithm = objective.algorithm;
    let fixture = build_fixture(objective, cfg)?;

    // Analytic gradients in one taped pass.
    let mut tape = Tape::new();
    let (loss, pv) = batch_loss(
        &fixture.theta,
        &fixture.items,
        &fixture.objective,
        1.0,
        &mut tape,
    )?;
    tape.backward(loss)?;
    let named: Vec<(String, usize)> = fixture
        .theta
        .named_tensors()
        .iter()
        .map(|(n, t)| (n.clone(), t.numel()))
        .collect();
    let mut analytic: Vec<(String, Vec<f64>)> = Vec::with_capacity(named.len());
    for ((name, numel), &var) in named.iter().zip(pv.vars()) {
        let g = tape
            .grad(var)
            .map(|g| g.to_vec())
            .unwrap_or_else(|| vec![0.0; *numel]);
        analytic.push((name.clone(), g));
    }
    drop(tape);

    // Central differences, parallel over parameter coordinates.
    let coords: Vec<(usize, usize)> = named
        .iter()
        .enumerate()
        .flat_map(|(ti, (_, numel))| (0..*numel).map(move |j| (ti, j)))
        .collect();
    let h = cfg.fd_step;
    let eval = |theta: &PolicyParams| -> f64 {
        let mut t = Tape::no_grad();
        let (loss, _) = batch_loss(theta, &fixture.items, &fixture.objective, 1.0, &mut t)
            .expect("loss evaluates on perturbed params");
        t.value(loss)[0]
    };
    let fd: Vec<f64> = coords
        .par_chunks(256)
        .flat_map_iter(|chunk| {
            let mut local = fixture.theta.clone();
            let mut out = Vec::with_capacity(chunk.len());
            for &(ti, j) in chunk {
                let orig = {
                    let (_, t) = &mut local.named_tensors_mut()[ti];
                    let orig = t.data()[j];
                    t.data_mut()[j] = orig + h;
                    orig
                };
                let up = eval(&local);
                {
                    let (_, t) = &mut local.named_tensors_mut()[ti];
                    t.data_mut()[j] = orig - h;
                }
                let down = eval(&local);
                {
                    let (_, t) = &mut local.named_tensors_mut()[ti];
                    t.data_mut()[j] = orig;
                }
                out.push((up - down) / (2.0 * h));
            }
            out
        })
        .collect();

    let mut max_rel_err = 0.0f64;
    let mut worst_param = String::new();
    let floor = cfg.atol / cfg.rtol;
    for (idx, &(ti, j)) in coords.iter().enumerate() {
        let mut a = analytic[ti].1[j];
        if cfg.corrupt && idx == coords.len() / 2 {
            a += 0.01;
        }
        let f = fd[idx];
        let rel = (a - f).abs() / a.abs().max(f.abs()).max(floor);
        if rel > max_rel_err {
            max_rel_err = rel;
            worst_param = format!("{}[{}]", analytic[ti].0, j);
        }
    }
    Ok(GradCheckResult {
        algorithm,
        params_checked: coords.len(),
        max_rel_err,
        worst_param,
        passed: max_rel_err < cfg.rtol,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> GradCheckConfig {
        GradCheckConfig {
            prompts: 1,
            group_size: 2,
            max_new_tokens: 6,
            model: ModelConfig {
                vocab_size: Vocab::for_tasks(&[TaskKind::Addition]).size(),
                dim: 16,
                layers: 1,
                heads: 2,
                max_seq_len: 16,
            },
            ..GradCheckConfig::default()
        }
    }

    #[test]
    fn archer_loss_gradients_match_finite_differences() {
        let res = gradcheck_objective(Algorithm::Archer, &quick_cfg()).unwrap();
        assert!(
            res.passed,
            "max rel err {} at {}",
            res.max_rel_err, res.worst_param
        );
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let cfg = GradCheckConfig {
            corrupt: true,
            ..quick_cfg()
        };
        let res = gradcheck_objective(Algorithm::Archer, &cfg).unwrap();
        assert!(!res.passed);
    }
}
