use rlvr_core::gradcheck::{gradcheck_objective, GradCheckConfig};
use rlvr_core::objective::Algorithm;

fn main() {
    let cfg = GradCheckConfig::default();
    for alg in [Algorithm::Grpo, Algorithm::Dapo, Algorithm::Archer] {
        let res = gradcheck_objective(alg, &cfg).unwrap();
        println!(
            "{}: {} params, max rel err {:.3e} at {}, passed={}, {:.1}s",
            alg.name(), res.params_checked, res.max_rel_err, res.worst_param, res.passed, res.seconds
        );
    }
}
