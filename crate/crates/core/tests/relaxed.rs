mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmab_core::{dp_optimal, run_relaxed, solve_lambda_star, ArmState, DEFAULT_GUARD, DEFAULT_T_CAP};

#[test]
fn random_plans_meet_budget_in_rate_and_in_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..10 {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..n);
        let specs: Vec<_> = (0..n).map(|_| common::random_c1_spec(&mut rng, 12)).collect();
        let plan = solve_lambda_star(&specs, k, DEFAULT_T_CAP).unwrap();
        assert!((plan.total_rate() - k as f64).abs() <= 1e-6, "trial {trial}: {}", plan.total_rate());
        let out = run_relaxed(&specs, &plan, 100_000, trial).unwrap();
        assert!(
            (out.mean_activations - k as f64).abs() <= 0.01 * k as f64,
            "trial {trial}: {} activations for K={k}",
            out.mean_activations
        );
    }
}

#[test]
fn relaxed_cost_bounds_short_horizon_optimum() {
    for (n, k, q) in [(3, 1, 0.3), (3, 1, 0.6), (4, 2, 0.5)] {
        let specs = common::homogeneous(n, q);
        let plan = solve_lambda_star(&specs, k, DEFAULT_T_CAP).unwrap();
        let init = vec![ArmState::healthy_start(); n];
        let horizon = 10;
        let dp = dp_optimal(&specs, &init, k, horizon, DEFAULT_GUARD).unwrap();
        let per_slot = dp.cost / f64::from(horizon);
        assert!(
            plan.average_cost() <= per_slot + 0.05,
            "N={n} q={q}: relaxed {} vs optimal {per_slot}",
            plan.average_cost()
        );
    }
}
