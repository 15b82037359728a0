//! Report types and order-independent aggregation for the experiment
//! harness.
//!
//! Reports are plain serde structs with a fixed field order, no maps, and no
//! wall-clock or host information, so a `(config, master_seed)` pair fully
//! determines every byte of the serialized output regardless of worker count.

use serde::{Deserialize, Serialize};

use crate::design::DesignSolution;
use crate::diagnostics::{PredictedTerms, ProblemConstants};
use crate::history::TrialReport;
use crate::regression::RegressionMetrics;

pub const SCHEMA_VERSION: &str = "chernoff.report.v1";

/// Box statistics under the Tukey hinge convention: for an odd count both
/// halves include the median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Computes box statistics; the input need not be sorted.
pub fn box_stats(values: &[f64]) -> BoxStats {
    assert!(!values.is_empty(), "box stats need at least one value");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (lower, upper) = if n % 2 == 1 {
        (&v[..=n / 2], &v[n / 2..])
    } else {
        (&v[..n / 2], &v[n / 2..])
    };
    BoxStats {
        min: v[0],
        q1: median_of(lower),
        median: median_of(&v),
        q3: median_of(upper),
        max: v[n - 1],
        mean: v.iter().sum::<f64>() / n as f64,
    }
}

/// Aggregate of one policy's testing trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTestSummary {
    pub policy: String,
    pub trials: u64,
    /// Fraction of trials that declared a wrong hypothesis; truncated trials
    /// count as errors.
    pub error_rate: f64,
    pub truncated: u64,
    pub stop_time: BoxStats,
    /// Raw stopping times in trial order.
    pub stop_times: Vec<u64>,
    pub uniform_fallback_rounds: u64,
}

/// Deterministic reduce over trial reports (keyed by trial index upstream).
pub fn summarize_trials(policy: String, reports: &[TrialReport]) -> PolicyTestSummary {
    let trials = reports.len() as u64;
    let errors = reports.iter().filter(|r| !r.correct || r.truncated).count();
    let truncated = reports.iter().filter(|r| r.truncated).count() as u64;
    let times: Vec<f64> = reports.iter().map(|r| r.stop_time as f64).collect();
    PolicyTestSummary {
        policy,
        trials,
        error_rate: errors as f64 / trials as f64,
        truncated,
        stop_time: box_stats(&times),
        stop_times: reports.iter().map(|r| r.stop_time).collect(),
        uniform_fallback_rounds: reports.iter().map(|r| r.uniform_fallback_rounds).sum(),
    }
}

/// Per-checkpoint quartile curves over one policy's regression trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionCurve {
    pub policy: String,
    pub trials: u64,
    pub checkpoints: Vec<u64>,
    pub est_err_q1: Vec<f64>,
    pub est_err_median: Vec<f64>,
    pub est_err_q3: Vec<f64>,
    pub pt_gap_q1: Vec<f64>,
    pub pt_gap_median: Vec<f64>,
    pub pt_gap_q3: Vec<f64>,
    pub support_size_median: Vec<f64>,
    pub non_spanning_rounds: u64,
    pub fit_warnings: u64,
}

pub fn summarize_regression(policy: String, runs: &[RegressionMetrics]) -> RegressionCurve {
    assert!(!runs.is_empty());
    let checkpoints = runs[0].checkpoints.clone();
    let k = checkpoints.len();
    let mut curve = RegressionCurve {
        policy,
        trials: runs.len() as u64,
        checkpoints,
        est_err_q1: Vec::with_capacity(k),
        est_err_median: Vec::with_capacity(k),
        est_err_q3: Vec::with_capacity(k),
        pt_gap_q1: Vec::with_capacity(k),
        pt_gap_median: Vec::with_capacity(k),
        pt_gap_q3: Vec::with_capacity(k),
        support_size_median: Vec::with_capacity(k),
        non_spanning_rounds: runs.iter().map(|r| r.non_spanning_rounds).sum(),
        fit_warnings: runs.iter().map(|r| r.fit_warnings).sum(),
    };
    for i in 0..k {
        let err: Vec<f64> = runs.iter().map(|r| r.est_err[i]).collect();
        let gap: Vec<f64> = runs.iter().map(|r| r.pt_gap[i]).collect();
        let sup: Vec<f64> = runs.iter().map(|r| r.support_sizes[i] as f64).collect();
        let e = box_stats(&err);
        let g = box_stats(&gap);
        curve.est_err_q1.push(e.q1);
        curve.est_err_median.push(e.median);
        curve.est_err_q3.push(e.q3);
        curve.pt_gap_q1.push(g.q1);
        curve.pt_gap_median.push(g.median);
        curve.pt_gap_q3.push(g.q3);
        curve.support_size_median.push(box_stats(&sup).median);
    }
    curve
}

/// Constants block of a report; infinite predicted terms serialize as null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBlock {
    pub d0: f64,
    pub d1: f64,
    pub de: f64,
    pub dnj: f64,
    pub eta0: f64,
    pub per_hyp_designs: Vec<Vec<f64>>,
    pub exploration_term: Option<f64>,
    pub exploitation_term: Option<f64>,
    pub uniform_term: Option<f64>,
    pub formulas: Vec<String>,
    pub notes: Vec<String>,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl ConstantsBlock {
    pub fn new(consts: &ProblemConstants, terms: &PredictedTerms) -> Self {
        Self {
            d0: consts.d0,
            d1: consts.d1,
            de: consts.de,
            dnj: consts.dnj,
            eta0: consts.eta0,
            per_hyp_designs: consts
                .per_hyp_designs
                .iter()
                .map(|d| d.probs.clone())
                .collect(),
            exploration_term: finite_or_none(terms.exploration_term),
            exploitation_term: finite_or_none(terms.exploitation_term),
            uniform_term: finite_or_none(terms.uniform_term),
            formulas: terms.formulas.to_vec(),
            notes: consts.notes.clone(),
        }
    }
}

/// One computed design, for the `design` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignBlock {
    pub probs: Vec<f64>,
    pub objective: f64,
    pub support_size: usize,
    pub support: Vec<usize>,
    pub status: String,
    pub converged: bool,
    pub sparsified: bool,
}

impl DesignBlock {
    pub fn new(sol: &DesignSolution, sparsified: bool) -> Self {
        Self {
            probs: sol.design.probs.clone(),
            objective: sol.objective,
            support_size: sol.design.support_size(),
            support: sol.design.support(),
            status: format!("{:?}", sol.status).to_lowercase(),
            converged: sol.converged,
            sparsified,
        }
    }
}

/// Top-level report; sections are populated per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub artifact_version: String,
    pub command: String,
    /// Echo of the resolved configuration.
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub testing: Option<Vec<PolicyTestSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<Vec<RegressionCurve>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            constants: None,
            testing: None,
            regression: None,
            design: None,
        }
    }

    pub fn to_json_pretty(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tidy long-format rows (`policy,trial,metric,checkpoint,value`) for
/// external plotting.
pub fn tidy_csv_rows(
    testing: Option<&[(String, Vec<TrialReport>)]>,
    regression: Option<&[(String, Vec<RegressionMetrics>)]>,
) -> Vec<(String, u64, String, u64, f64)> {
    let mut rows = Vec::new();
    if let Some(testing) = testing {
        for (policy, reports) in testing {
            for (trial, r) in reports.iter().enumerate() {
                rows.push((
                    policy.clone(),
                    trial as u64,
                    "stop_time".to_string(),
                    0,
                    r.stop_time as f64,
                ));
                rows.push((
                    policy.clone(),
                    trial as u64,
                    "correct".to_string(),
                    0,
                    if r.correct { 1.0 } else { 0.0 },
                ));
            }
        }
    }
    if let Some(regression) = regression {
        for (policy, runs) in regression {
            for (trial, run) in runs.iter().enumerate() {
                for (i, &cp) in run.checkpoints.iter().enumerate() {
                    rows.push((
                        policy.clone(),
                        trial as u64,
                        "est_err".to_string(),
                        cp,
                        run.est_err[i],
                    ));
                    rows.push((
                        policy.clone(),
                        trial as u64,
                        "pt_gap".to_string(),
                        cp,
                        run.pt_gap[i],
                    ));
                    rows.push((
                        policy.clone(),
                        trial as u64,
                        "support_size".to_string(),
                        cp,
                        run.support_sizes[i] as f64,
                    ));
                }
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tukey_hinges_odd_and_even() {
        // Odd count: both halves include the median.
        let s = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.q3, 4.0);
        // Even count: plain halves.
        let s = box_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.q1, 1.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q3, 3.5);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 4.0);
    }

    #[test]
    fn quartiles_are_ordered() {
        let s = box_stats(&[9.0, 1.0, 7.0, 3.0, 5.0, 2.0, 8.0]);
        assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
    }

    #[test]
    fn summary_counts_truncation_as_error() {
        let mk = |correct: bool, truncated: bool, t: u64| TrialReport {
            stop_time: t,
            declared_hyp: 0,
            correct,
            arm_counts: vec![t],
            seed: 0,
            truncated,
            uniform_fallback_rounds: 0,
        };
        let s = summarize_trials(
            "cs".into(),
            &[mk(true, false, 10), mk(false, false, 20), mk(true, true, 30)],
        );
        assert_eq!(s.trials, 3);
        assert!((s.error_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.truncated, 1);
        assert_eq!(s.stop_times, vec![10, 20, 30]);
    }

    #[test]
    fn infinite_terms_serialize_as_null() {
        let block = ConstantsBlock {
            d0: 1.0,
            d1: 0.0,
            de: 0.5,
            dnj: 0.0,
            eta0: 0.0,
            per_hyp_designs: vec![vec![1.0]],
            exploration_term: finite_or_none(f64::INFINITY),
            exploitation_term: finite_or_none(3.4),
            uniform_term: finite_or_none(2.1),
            formulas: vec![],
            notes: vec![],
        };
        let json = serde_json::to_string(&block).unwrap();
        assert!(json.contains("\"exploration_term\":null"));
        assert!(json.contains("\"exploitation_term\":3.4"));
    }
}
