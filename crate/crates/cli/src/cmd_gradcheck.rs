//! `rlvr gradcheck`: finite-difference verification of all objective
//! gradients. Exits nonzero when any check fails.

use anyhow::Result;
use rlvr_core::gradcheck::{gradcheck_objective, gradcheck_with, objective_for, GradCheckConfig};
use rlvr_core::objective::Algorithm;

pub fn run(seed: u64, scale: f64, corrupt: bool) -> Result<bool> {
    let cfg = GradCheckConfig {
        seed,
        perturbation_scale: scale,
        corrupt,
        ..GradCheckConfig::default()
    };
    let mut all_passed = true;
    for alg in [Algorithm::Grpo, Algorithm::Dapo, Algorithm::Archer] {
        let res = gradcheck_objective(alg, &cfg)?;
        all_passed &= res.passed;
        print_result(&res, alg.name().to_string());
    }
    // Archer with the KL term disabled exercises the beta = 0 path.
    let mut no_kl = objective_for(Algorithm::Archer);
    no_kl.beta_knowledge = 0.0;
    let res = gradcheck_with(&no_kl, &cfg)?;
    all_passed &= res.passed;
    print_result(&res, "archer(beta=0)".to_string());
    Ok(all_passed)
}

fn print_result(res: &rlvr_core::gradcheck::GradCheckResult, label: String) {
    println!(
        "{:>16}: {:>6} params checked, max rel err {:.3e} at {}, {} ({:.1}s)",
        label,
        res.params_checked,
        res.max_rel_err,
        res.worst_param,
        if res.passed { "PASS" } else { "FAIL" },
        res.seconds
    );
}
