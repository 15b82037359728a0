//! The per-trial ledger: sampled arms, observations, and the running
//! sum-of-squared-errors per hypothesis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::MeansTable;
use crate::rng::Stream;
use crate::{Error, Result};

/// Arm/observation ledger with the cumulative squared error
/// `L_t(theta_j) = sum_s (Y_s - mu_{I_s}(theta_j))^2` kept incrementally,
/// O(J) per update. `recompute_losses` is the from-scratch oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialHistory {
    pub arms: Vec<u32>,
    pub obs: Vec<f64>,
    pub cum_sq_err: Vec<f64>,
    pub t: usize,
    pub rng_seed: u64,
}

impl TrialHistory {
    pub fn new(hyp_count: usize, rng_seed: u64) -> Self {
        Self {
            arms: Vec::new(),
            obs: Vec::new(),
            cum_sq_err: vec![0.0; hyp_count],
            t: 0,
            rng_seed,
        }
    }

    /// Appends `(arm, obs)` and bumps every hypothesis's squared error by
    /// `(obs - mu_arm(theta_j))^2`.
    pub fn update_losses(&mut self, env_means: &MeansTable, arm: usize, obs: f64) -> Result<()> {
        if arm >= env_means.arm_count() {
            return Err(Error::ArmOutOfRange {
                arm,
                n: env_means.arm_count(),
            });
        }
        let row = env_means.arm_row(arm);
        for (acc, &mu) in self.cum_sq_err.iter_mut().zip(row) {
            let r = obs - mu;
            *acc += r * r;
        }
        self.arms.push(arm as u32);
        self.obs.push(obs);
        self.t += 1;
        Ok(())
    }

    /// From-scratch recomputation of the loss vector; test oracle for the
    /// incremental ledger.
    pub fn recompute_losses(&self, env_means: &MeansTable) -> Vec<f64> {
        let j = env_means.hyp_count();
        let mut out = vec![0.0; j];
        for (&arm, &y) in self.arms.iter().zip(&self.obs) {
            let row = env_means.arm_row(arm as usize);
            for (acc, &mu) in out.iter_mut().zip(row) {
                let r = y - mu;
                *acc += r * r;
            }
        }
        out
    }

    /// Most likely hypothesis (argmin of `cum_sq_err`) and its runner-up,
    /// breaking ties uniformly at random.
    pub fn most_likely(&self, rng: &mut Stream) -> Result<(usize, usize)> {
        if self.t == 0 {
            return Err(Error::EmptyHistory);
        }
        let (best, runner) = argmin_two(&self.cum_sq_err, rng);
        Ok((best, runner))
    }

    /// Number of pulls per arm.
    pub fn arm_counts(&self, arm_count: usize) -> Vec<u64> {
        let mut counts = vec![0u64; arm_count];
        for &a in &self.arms {
            counts[a as usize] += 1;
        }
        counts
    }
}

/// Argmin and second-argmin of `values` with uniform random tie-breaking
/// inside each tied set. Requires `values.len() >= 2`.
pub(crate) fn argmin_two(values: &[f64], rng: &mut Stream) -> (usize, usize) {
    debug_assert!(values.len() >= 2);
    let mut min = f64::INFINITY;
    for &v in values {
        if v < min {
            min = v;
        }
    }
    // Reservoir-free: count ties, then index into them.
    let tied = values.iter().filter(|&&v| v == min).count();
    let best = if tied == 1 {
        values.iter().position(|&v| v == min).unwrap()
    } else {
        let k = rng.gen_range(0..tied);
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == min)
            .nth(k)
            .unwrap()
            .0
    };
    // Runner-up: remaining tied-at-min entries first, otherwise the second
    // smallest value's tie set.
    if tied > 1 {
        let k = rng.gen_range(0..tied - 1);
        let runner = values
            .iter()
            .enumerate()
            .filter(|(i, &v)| v == min && *i != best)
            .nth(k)
            .unwrap()
            .0;
        return (best, runner);
    }
    let mut second = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if i != best && v < second {
            second = v;
        }
    }
    let tied2 = values
        .iter()
        .enumerate()
        .filter(|(i, &v)| v == second && *i != best)
        .count();
    let k = if tied2 > 1 { rng.gen_range(0..tied2) } else { 0 };
    let runner = values
        .iter()
        .enumerate()
        .filter(|(i, &v)| v == second && *i != best)
        .nth(k)
        .unwrap()
        .0;
    (best, runner)
}

/// Outcome of one sequential testing trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Stopping time tau_delta (equals the horizon cap when truncated).
    pub stop_time: u64,
    /// Declared hypothesis; for truncated runs, the most likely one at the cap.
    pub declared_hyp: usize,
    pub correct: bool,
    pub arm_counts: Vec<u64>,
    pub seed: u64,
    /// True when the safety cap was reached before the stopping rule fired.
    pub truncated: bool,
    /// Rounds where a degenerate (objective-zero) verification design forced a
    /// uniform fallback.
    pub uniform_fallback_rounds: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    fn table() -> MeansTable {
        MeansTable::from_rows(&[vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn symmetric_increment_keeps_losses_equal() {
        let means = MeansTable::from_rows(&[vec![0.5, 0.5], vec![1.0, 2.0]]).unwrap();
        let mut h = TrialHistory::new(2, 0);
        h.update_losses(&means, 0, 0.5).unwrap();
        assert_eq!(h.cum_sq_err[0], h.cum_sq_err[1]);
    }

    #[test]
    fn exact_square_increment() {
        let mut h = TrialHistory::new(2, 0);
        h.update_losses(&table(), 0, 1.0).unwrap();
        assert_eq!(h.cum_sq_err, vec![0.0, 1.0]);
        assert_eq!(h.t, 1);
        assert_eq!(h.arms, vec![0]);
    }

    #[test]
    fn five_step_history_matches_recomputation() {
        let means =
            MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]]).unwrap();
        let mut rng = stream_from_seed(5);
        let mut h = TrialHistory::new(3, 5);
        for s in 0..5 {
            let arm = s % 2;
            let y: f64 = rng.gen_range(-1.0..2.0);
            h.update_losses(&means, arm, y).unwrap();
        }
        let oracle = h.recompute_losses(&means);
        for (a, b) in h.cum_sq_err.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn most_likely_orders_argmin_and_runner_up() {
        let mut h = TrialHistory::new(3, 0);
        h.cum_sq_err = vec![3.0, 1.0, 2.0];
        h.t = 1;
        let mut rng = stream_from_seed(1);
        assert_eq!(h.most_likely(&mut rng).unwrap(), (1, 2));
    }

    #[test]
    fn most_likely_errors_on_empty_history() {
        let h = TrialHistory::new(2, 0);
        let mut rng = stream_from_seed(1);
        assert!(h.most_likely(&mut rng).is_err());
    }

    #[test]
    fn tie_break_is_uniform() {
        let mut h = TrialHistory::new(2, 0);
        h.cum_sq_err = vec![1.0, 1.0];
        h.t = 1;
        let mut rng = stream_from_seed(123);
        let trials = 10_000;
        let mut first = 0u32;
        for _ in 0..trials {
            let (best, runner) = h.most_likely(&mut rng).unwrap();
            assert_ne!(best, runner);
            if best == 0 {
                first += 1;
            }
        }
        let freq = f64::from(first) / trials as f64;
        assert!((freq - 0.5).abs() < 0.05, "freq = {freq}");
    }

    #[test]
    fn dominated_value_never_runner_up() {
        let mut h = TrialHistory::new(3, 0);
        h.cum_sq_err = vec![0.5, 0.5, 9.0];
        h.t = 1;
        let mut rng = stream_from_seed(77);
        for _ in 0..1000 {
            let (_, runner) = h.most_likely(&mut rng).unwrap();
            assert_ne!(runner, 2);
        }
    }
}
