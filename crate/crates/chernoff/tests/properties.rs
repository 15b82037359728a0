//! Property tests for the ledger, reward generation, stopping rule, and the
//! design solvers.

use proptest::prelude::*;

use chernoff::design::{
    solve_verification_lp_with, sparsify_design, DesignTarget, EigInstance, LpInstance,
};
use chernoff::env::{draw_reward, MeansTable, NoiseSpec, TestEnv};
use chernoff::history::TrialHistory;
use chernoff::policies::{check_stop, run_trial, PolicyConfig, PolicyKind, StoppingRule};
use chernoff::rng::stream_from_seed;

fn means_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    // n in 1..=4 arms, J in 2..=4 hypotheses, means in [-2, 2].
    (1usize..=4, 2usize..=4).prop_flat_map(|(n, j)| {
        proptest::collection::vec(
            proptest::collection::vec(-2.0f64..2.0, j..=j),
            n..=n,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Incremental loss ledger equals from-scratch recomputation.
    #[test]
    fn loss_ledger_matches_recomputation(
        rows in means_strategy(),
        arms in proptest::collection::vec(0usize..4, 1..40),
        obs in proptest::collection::vec(-3.0f64..3.0, 40),
    ) {
        let means = MeansTable::from_rows(&rows).unwrap();
        let mut hist = TrialHistory::new(means.hyp_count(), 0);
        for (&arm, &y) in arms.iter().zip(&obs) {
            let arm = arm % means.arm_count();
            hist.update_losses(&means, arm, y).unwrap();
        }
        let oracle = hist.recompute_losses(&means);
        for (a, b) in hist.cum_sq_err.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    /// Same seed, same reward sequence; different seeds diverge somewhere.
    #[test]
    fn reward_streams_are_seed_deterministic(seed in any::<u64>(), arms in proptest::collection::vec(0usize..2, 1..20)) {
        let means = MeansTable::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let noise = NoiseSpec::gaussian_default();
        let mut r1 = stream_from_seed(seed);
        let mut r2 = stream_from_seed(seed);
        for &arm in &arms {
            let a = draw_reward(&means, 0, arm, &noise, &mut r1).unwrap();
            let b = draw_reward(&means, 0, arm, &noise, &mut r2).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    /// The exact LP solution is primal feasible and dual certified.
    #[test]
    fn lp_solutions_are_certified(
        rows in (1usize..=4, 2usize..=5).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, n..=n), m..=m)
        })
    ) {
        let inst = LpInstance::new(rows.clone()).unwrap();
        let sol = solve_verification_lp_with(&inst, 0.0).unwrap();
        // Feasibility: every row value at least the objective.
        for row in &rows {
            let v: f64 = row.iter().zip(&sol.design.probs).map(|(g, p)| g * p).sum();
            prop_assert!(v >= sol.objective - 1e-9);
        }
        // Distribution.
        let total: f64 = sol.design.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(sol.design.probs.iter().all(|&p| p >= 0.0));
        // Certificate.
        prop_assert!(sol.dual_gap.abs() <= 1e-8, "gap {}", sol.dual_gap);
    }

    /// Scaling every gap by c > 0 scales the objective by c and keeps the
    /// optimal design.
    #[test]
    fn lp_scale_equivariance(
        rows in (1usize..=3, 2usize..=4).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, n..=n), m..=m)
        }),
        c in 0.1f64..50.0,
    ) {
        let inst = LpInstance::new(rows.clone()).unwrap();
        let scaled = LpInstance::new(
            rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(),
        )
        .unwrap();
        let a = solve_verification_lp_with(&inst, 0.0).unwrap();
        let b = solve_verification_lp_with(&scaled, 0.0).unwrap();
        prop_assert!((b.objective - c * a.objective).abs() <= 1e-7 * (1.0 + c * a.objective));
        for (x, y) in a.design.probs.iter().zip(&b.design.probs) {
            prop_assert!((x - y).abs() < 1e-7);
        }
    }

    /// Declared stops persist on any extension where every competitor gap grew.
    #[test]
    fn stopping_is_monotone(
        lead in 0.0f64..5.0,
        gaps in proptest::collection::vec(0.0f64..20.0, 1..5),
        growth in proptest::collection::vec(0.0f64..10.0, 5),
    ) {
        let j = gaps.len() + 1;
        let rule = StoppingRule::gaussian(j, 0.1).unwrap();
        let mut hist = TrialHistory::new(j, 0);
        hist.t = 1;
        hist.cum_sq_err = std::iter::once(lead)
            .chain(gaps.iter().map(|g| lead + g))
            .collect();
        if let Some(declared) = check_stop(&hist, &rule) {
            let mut grown = hist.clone();
            for (k, v) in grown.cum_sq_err.iter_mut().enumerate() {
                if k != declared {
                    *v += growth[k % growth.len()];
                }
            }
            prop_assert_eq!(check_stop(&grown, &rule), Some(declared));
        }
    }

    /// Sparsification never loses more than the tolerance, whatever the
    /// design.
    #[test]
    fn sparsify_preserves_eig_objective(
        grads in (1usize..=3, 2usize..=6).prop_flat_map(|(d, n)| {
            proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, d..=d), n..=n)
        }),
        raw_weights in proptest::collection::vec(0.01f64..1.0, 2..=6),
    ) {
        let n = grads.len();
        let inst = EigInstance::new(grads).unwrap();
        let mut probs = vec![0.0; n];
        for (i, p) in probs.iter_mut().enumerate() {
            *p = raw_weights[i % raw_weights.len()];
        }
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        let design = chernoff::Design::new(probs, 1e-4).unwrap();
        let before = inst.min_eig_value(&design.probs);
        let reduced = sparsify_design(&design, DesignTarget::Eig(&inst));
        let after = inst.min_eig_value(&reduced.probs);
        prop_assert!(after >= before - 1e-6, "lost {}", before - after);
        let total: f64 = reduced.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

/// Bounded noise containment over a million draws.
#[test]
fn bounded_noise_containment() {
    let means = MeansTable::from_rows(&[vec![0.9, -0.9], vec![0.1, -0.1]]).unwrap();
    let noise = NoiseSpec::bounded_uniform(0.6, 4.0).unwrap();
    let bound = 1.0;
    let mut rng = stream_from_seed(2024);
    for k in 0..1_000_000u32 {
        let arm = (k % 2) as usize;
        let y = draw_reward(&means, 0, arm, &noise, &mut rng).unwrap();
        assert!((-bound..=bound).contains(&y), "draw {k} escaped: {y}");
    }
}

/// Trial runs are pure functions of (seed, config, env).
#[test]
fn trials_are_reproducible() {
    let means = MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]]).unwrap();
    let env = TestEnv::new(means, NoiseSpec::gaussian_default(), 0).unwrap();
    let rule = StoppingRule::gaussian(3, 0.1).unwrap();
    for seed in [3u64, 99, 20_000] {
        let policy = PolicyConfig {
            kind: PolicyKind::EpsCs,
            max_rounds: 50_000,
            seed,
        };
        let a = run_trial(&env, &policy, &rule).unwrap();
        let b = run_trial(&env, &policy, &rule).unwrap();
        assert_eq!(a, b);
    }
}
