//! Property tests for the crate's cross-cutting invariants.

use proptest::prelude::*;
use rlvr_core::analytics::{avg_at_k, entropy_stats, pass_at_k, repetition_ratio};
use rlvr_core::envs::{self, ShapingConfig, TaskKind, Vocab};
use rlvr_core::objective::{
    clip_region_for, entropy_quantile, group_advantages, kl_term, surrogate_term, ClipRegion,
    TokenClass,
};
use rlvr_core::rollout::{dynamic_sampling_filter, PromptGroup, ResponseRecord, TokenStep};
use rlvr_core::tensor::Tape;

proptest! {
    #[test]
    fn log_softmax_exponentiates_to_one(values in prop::collection::vec(-30.0f64..30.0, 1..40)) {
        let mut tape = Tape::new();
        let x = tape.constant_vec(values);
        let ls = tape.log_softmax(x).unwrap();
        let total: f64 = tape.value(ls).iter().map(|&v| v.exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_lies_within_range(values in prop::collection::vec(0.0f64..5.0, 1..50), rho in 0.01f64..0.99) {
        let q = entropy_quantile(&values, rho).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(q >= lo && q <= hi);
    }

    #[test]
    fn advantages_are_centered(rewards in prop::collection::vec(-1.0f64..1.0, 2..20)) {
        let adv = group_advantages(&rewards, 1e-6).unwrap();
        let mean: f64 = adv.iter().sum::<f64>() / adv.len() as f64;
        // Centered up to the floor effect on near-constant groups.
        prop_assert!(mean.abs() < 1e-6 * rewards.len() as f64 + 1e-9);
    }

    #[test]
    fn surrogate_is_min_of_both_branches(
        r in 0.01f64..4.0,
        adv in -3.0f64..3.0,
        eps_low in 0.0f64..0.9,
        eps_high in 0.0f64..0.9,
    ) {
        let s = surrogate_term(r, adv, eps_low, eps_high);
        let unclipped = r * adv;
        let clipped = r.clamp(1.0 - eps_low, 1.0 + eps_high) * adv;
        prop_assert!(s <= unclipped + 1e-15);
        prop_assert!(s <= clipped + 1e-15);
        prop_assert!((s - unclipped.min(clipped)).abs() < 1e-15);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_only_at_equality(
        lp_theta in -10.0f64..0.0,
        delta in -5.0f64..5.0,
    ) {
        let k = kl_term(lp_theta, lp_theta + delta);
        prop_assert!(k >= 0.0);
        if delta.abs() > 1e-9 {
            prop_assert!(k > 0.0);
        }
        prop_assert_eq!(kl_term(lp_theta, lp_theta), 0.0);
    }

    #[test]
    fn clip_region_is_total_partition(
        r in 0.001f64..3.0,
        eps_k in 0.01f64..0.5,
        extra in 0.0f64..0.5,
        reasoning in any::<bool>(),
    ) {
        let eps_r = eps_k + extra;
        let class = if reasoning { TokenClass::Reasoning } else { TokenClass::Knowledge };
        let region = clip_region_for(r, class, eps_r, eps_k);
        // Re-derive membership independently.
        let (bl, bh) = (1.0 - eps_k, 1.0 + eps_k);
        let (el, eh) = (1.0 - eps_r, 1.0 + eps_r);
        let expected = if r >= bl && r <= bh {
            ClipRegion::A
        } else if reasoning && r > bh && r <= eh {
            ClipRegion::E
        } else if reasoning && r >= el && r < bl {
            ClipRegion::F
        } else if r > 1.0 {
            ClipRegion::C
        } else {
            ClipRegion::B
        };
        prop_assert_eq!(region, expected);
        if !reasoning {
            prop_assert!(region != ClipRegion::E && region != ClipRegion::F);
        }
    }

    #[test]
    fn repetition_ratio_is_bounded_and_zero_iff_distinct(
        tokens in prop::collection::vec(0u32..6, 0..40),
        n in 1usize..5,
    ) {
        let r = repetition_ratio(&tokens, n);
        prop_assert!((0.0..=1.0).contains(&r));
        if tokens.len() >= n {
            let grams: std::collections::HashSet<&[u32]> = tokens.windows(n).collect();
            let all_distinct = grams.len() == tokens.len() - n + 1;
            prop_assert_eq!(r == 0.0, all_distinct);
        } else {
            prop_assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn pass_at_k_dominates_avg_at_k(flags in prop::collection::vec(any::<bool>(), 1..30)) {
        let a = avg_at_k(&flags);
        let p = pass_at_k(&flags);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(p == 0.0 || p == 1.0);
        prop_assert!(p >= a);
    }

    #[test]
    fn verifier_is_total_and_deterministic(
        tokens in prop::collection::vec(any::<u32>(), 0..30),
        gt in "[0-9]{1,4}",
    ) {
        let vocab = Vocab::for_tasks(&TaskKind::ALL);
        let a = envs::is_equivalent(&vocab, &tokens, &gt);
        let b = envs::is_equivalent(&vocab, &tokens, &gt);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rewards_are_bounded_and_binary_without_shaping(
        tokens in prop::collection::vec(0u32..16, 0..20),
        response_len in 0usize..16,
        truncated in any::<bool>(),
        enabled in any::<bool>(),
    ) {
        let vocab = Vocab::for_tasks(&TaskKind::ALL);
        let shaping = ShapingConfig { enabled, ..ShapingConfig::default() };
        let out = envs::reward(&vocab, &tokens, response_len, "42", truncated, &shaping);
        prop_assert!((-1.0..=1.0).contains(&out.reward));
        if !enabled {
            prop_assert!(out.reward == 0.0 || out.reward == 1.0);
            prop_assert_eq!(out.reward == 1.0, out.correct);
        }
    }

    #[test]
    fn filter_ignores_response_order(flags in prop::collection::vec(any::<bool>(), 2..12), rot in 0usize..12) {
        let vocab = Vocab::for_tasks(&[TaskKind::Addition]);
        let instance = envs::generate_instance(&vocab, TaskKind::Addition, 1, 0).unwrap();
        let mk = |flags: &[bool]| PromptGroup {
            instance: instance.clone(),
            responses: flags
                .iter()
                .map(|&correct| ResponseRecord {
                    steps: vec![TokenStep { token: 0, logprob_old: -1.0, entropy: 0.1, token_class: None }],
                    reward: f64::from(u8::from(correct)),
                    correct,
                    truncated: false,
                    advantage: None,
                    entropy_threshold: None,
                })
                .collect(),
        };
        let baseline = dynamic_sampling_filter(vec![mk(&flags)]).0.len();
        let mut rotated = flags.clone();
        rotated.rotate_left(rot % flags.len());
        let permuted = dynamic_sampling_filter(vec![mk(&rotated)]).0.len();
        prop_assert_eq!(baseline, permuted);
        let c = flags.iter().filter(|&&f| f).count();
        prop_assert_eq!(baseline == 1, c > 0 && c < flags.len());
    }

    #[test]
    fn entropy_stats_weighted_mean_identity(
        lens in prop::collection::vec(1usize..10, 1..8),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let records: Vec<rlvr_core::rollout::RolloutLogRecord> = lens
            .iter()
            .enumerate()
            .map(|(i, &n)| rlvr_core::rollout::RolloutLogRecord {
                step: 0,
                prompt_id: (i / 2) as u64,
                response_index: (i % 2) as u32,
                prompt_tokens: vec![0],
                tokens: vec![0; n],
                logprobs_old: vec![-1.0; n],
                entropies: (0..n).map(|_| rng.gen_range(0.0..2.5)).collect(),
                reward: 0.0,
                correct: false,
                truncated: false,
                advantage: 0.0,
                entropy_threshold: 0.0,
                token_classes: vec![],
            })
            .collect();
        let stats = entropy_stats(&records, 0.8).unwrap();
        let total_tokens: usize = stats.responses.iter().map(|r| r.token_count).sum();
        let weighted: f64 = stats
            .responses
            .iter()
            .map(|r| r.mean_entropy * r.token_count as f64)
            .sum::<f64>()
            / total_tokens as f64;
        prop_assert!((stats.batch_mean - weighted).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Taped gradients of random composed elementwise/matmul expressions
    /// match central finite differences.
    #[test]
    fn composed_gradients_match_finite_differences(
        seed in any::<u64>(),
        rows in 1usize..4,
        cols in 1usize..4,
    ) {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rows * cols;
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect();
        let w: Vec<f64> = (0..cols * cols).map(|_| rng.gen_range(-0.8..0.8)).collect();

        let build = |tape: &mut Tape, leaf: rlvr_core::tensor::Var| {
            let wv = tape.constant(vec![cols, cols], w.clone());
            let m = tape.matmul(leaf, wv).unwrap();
            let g = tape.gelu(m).unwrap();
            let e = tape.exp(g).unwrap();
            let s = tape.softmax_rows(e).unwrap();
            let sq = tape.mul(s, s).unwrap();
            tape.sum(sq).unwrap()
        };

        let mut tape = Tape::new();
        let leaf = tape.leaf(vec![rows, cols], data.clone());
        let loss = build(&mut tape, leaf);
        tape.backward(loss).unwrap();
        let analytic = tape.grad(leaf).unwrap().to_vec();

        let h = 1e-5;
        for i in 0..n {
            let eval = |v: f64| {
                let mut d = data.clone();
                d[i] = v;
                let mut t = Tape::no_grad();
                let leaf = t.leaf(vec![rows, cols], d);
                let l = build(&mut t, leaf);
                t.value(l)[0]
            };
            let fd = (eval(data[i] + h) - eval(data[i] - h)) / (2.0 * h);
            let denom = analytic[i].abs().max(fd.abs()).max(1e-4);
            prop_assert!(
                (analytic[i] - fd).abs() / denom < 1e-4,
                "entry {}: analytic {} vs fd {}",
                i,
                analytic[i],
                fd
            );
        }
    }
}
