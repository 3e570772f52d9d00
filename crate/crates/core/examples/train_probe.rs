use rlvr_core::analytics::{avg_at_k, evaluate_policy};
use rlvr_core::envs::{generate_instance, TaskKind};
use rlvr_core::policy::PolicyParams;
use rlvr_core::rng::{derive_seed, Stream};
use rlvr_core::trainer::*;
use std::ops::ControlFlow;
use std::time::Instant;

struct Probe {
    start: Instant,
    eval_every: u64,
    heldout: Vec<rlvr_core::envs::TaskInstance>,
    vocab: rlvr_core::envs::Vocab,
    target: f64,
}

impl TrainObserver for Probe {
    fn on_step(&mut self, r: &StepReport, params: &PolicyParams) -> ControlFlow<()> {
        if r.step % self.eval_every == 0 || r.step < 5 {
            let flags = evaluate_policy(params, &self.vocab, &self.heldout, 1, 0.8, 999).unwrap();
            let acc: f64 = flags.iter().map(|f| avg_at_k(f)).sum::<f64>() / flags.len() as f64;
            println!(
                "step {:4}  reward {:.3}  kept {}  dropped {}  prompts {:3}  H {:.3}  rep {:.3}  loss {:+.4}  gnorm {:.3}  avg@1 {:.3}  [{:.0}s]",
                r.step, r.mean_reward, r.kept_groups, r.dropped_groups, r.prompts_consumed,
                r.mean_entropy, r.repetition_ratio, r.loss, r.grad_norm, acc,
                self.start.elapsed().as_secs_f64()
            );
            if r.step % (self.eval_every * 4) == 0 {
                // Show what the policy emits for three held-out prompts.
                let sampling = rlvr_core::policy::SamplingConfig {
                    temperature: 0.8, top_p: 1.0, max_new_tokens: 6,
                    stop_token: self.vocab.stop_token(), greedy: false,
                };
                for inst in self.heldout.iter().take(3) {
                    let mut outs = Vec::new();
                    for s in 0..3 {
                        let r = rlvr_core::policy::sample_response(params, &inst.prompt, &sampling, 7000 + s).unwrap();
                        outs.push(self.vocab.decode(&r.tokens));
                    }
                    println!("    {} -> {:?} (gt {})", inst.prompt_text, outs, inst.ground_truth);
                }
            }
            if acc >= self.target {
                println!("TARGET REACHED at step {}", r.step);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    }
    fn on_warning(&mut self, _s: u64, m: &str) { let _ = m; }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3e-4);
    let steps: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(600);
    let dim: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(64);
    let minibatch: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(32);
    let epochs: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1);
    let max_new: usize = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(6);
    let refill: usize = args.get(8).and_then(|s| s.parse().ok()).unwrap_or(10);

    let cfg = TrainConfig {
        total_steps: steps,
        batch_groups: 8,
        minibatch_responses: minibatch,
        rollouts_per_prompt: 8,
        learning_rate: lr,
        seed,
        epochs,
        model: ModelShape { dim, layers: 2, heads: if dim % 4 == 0 { 4 } else { 2 }, max_seq_len: 32 },
        sampling: RolloutSampling { temperature: 1.0, top_p: 1.0, max_new_tokens: max_new },
        tasks: vec![TaskSpec { kind: TaskKind::Addition, difficulty: 2 }],
        rollout_log_every: 0,
        refill_factor: refill,
        ..TrainConfig::default()
    };
    let vocab = cfg.vocab();
    // Held-out instances drawn from a seed stream disjoint from training.
    let heldout: Vec<_> = (0..200)
        .map(|i| generate_instance(&vocab, TaskKind::Addition, 2, derive_seed(0xE7A1, Stream::Eval, i, 0)).unwrap())
        .collect();
    let mut probe = Probe {
        start: Instant::now(),
        eval_every: 25,
        heldout,
        vocab,
        target: 0.92,
    };
    let outcome = train(&cfg, &mut probe).unwrap();
    println!("completed {} steps in {:.0}s", outcome.completed_steps, probe.start.elapsed().as_secs_f64());
}
