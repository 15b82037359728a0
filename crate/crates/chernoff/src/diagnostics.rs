//! Problem-constant computation and sample-complexity predictors.
//!
//! For a finite environment with true hypothesis `theta*`:
//!
//! - `D0` — objective of the verification program at `theta*`; governs the
//!   asymptotic (exploitation) cost `log(J/delta) / D0`.
//! - `D1` — worst alternative gap against `theta*` under *any* hypothesis's
//!   verification proportion; governs the non-asymptotic (exploration) cost
//!   `log(J) / D1`.
//! - `De` — the same gap under the uniform design; exploration cost of the
//!   epsilon-greedy variant.
//! - `DNJ` — the two-phase exploration constant, reported for comparison
//!   only; no policy uses it. The source display's parenthesization is
//!   ambiguous, so the literal expression (squared min term times the
//!   max-min value over all hypothesis pairs) is computed and flagged.
//! - `eta0` — the smallest squared mean gap over all arms and hypothesis
//!   pairs; zero when some arm cannot separate two hypotheses.

use serde::{Deserialize, Serialize};

use crate::design::{solve_verification_lp, Design, LpInstance};
use crate::env::MeansTable;
use crate::{Error, Result};

/// Problem constants of a finite testing environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub d0: f64,
    pub d1: f64,
    pub de: f64,
    pub dnj: f64,
    pub eta0: f64,
    /// Verification proportion for every hypothesis.
    pub per_hyp_designs: Vec<Design>,
    /// Human-readable caveats (zero constants, formula ambiguities).
    pub notes: Vec<String>,
}

/// Solves the J verification programs and evaluates the constants.
pub fn compute_constants(env_means: &MeansTable, true_hyp: usize) -> Result<ProblemConstants> {
    let j = env_means.hyp_count();
    let n = env_means.arm_count();
    if true_hyp >= j {
        return Err(Error::HypOutOfRange { hyp: true_hyp, j });
    }

    let mut per_hyp_designs = Vec::with_capacity(j);
    for hyp in 0..j {
        let sol = solve_verification_lp(&LpInstance::verification(env_means, hyp)?)?;
        per_hyp_designs.push(sol.design);
    }

    // Gap of hypothesis `alt` against the truth under a given design.
    let gap_vs_truth = |probs: &[f64], alt: usize| -> f64 {
        (0..n)
            .map(|arm| {
                let g = env_means.mean(arm, alt) - env_means.mean(arm, true_hyp);
                (g * g) * probs[arm]
            })
            .sum()
    };
    let worst_alt_gap = |probs: &[f64]| -> f64 {
        (0..j)
            .filter(|&alt| alt != true_hyp)
            .map(|alt| gap_vs_truth(probs, alt))
            .fold(f64::INFINITY, f64::min)
    };

    let d0 = worst_alt_gap(&per_hyp_designs[true_hyp].probs);
    let d1 = per_hyp_designs
        .iter()
        .map(|d| worst_alt_gap(&d.probs))
        .fold(f64::INFINITY, f64::min);
    let de = worst_alt_gap(&Design::uniform(n).probs);
    let eta0 = env_means.eta0();

    // Two-phase constant: (min over ordered pairs of the pair gap under the
    // *alternative's* proportion)^2 times the max-min value over all pairs.
    let pair_gap = |probs: &[f64], a: usize, b: usize| -> f64 {
        (0..n)
            .map(|arm| {
                let g = env_means.mean(arm, a) - env_means.mean(arm, b);
                probs[arm] * g * g
            })
            .sum()
    };
    let mut min_pair = f64::INFINITY;
    for a in 0..j {
        for b in 0..j {
            if a != b {
                min_pair = min_pair.min(pair_gap(&per_hyp_designs[b].probs, a, b));
            }
        }
    }
    let all_pairs = LpInstance::all_pairs(env_means)?;
    let max_min_pairs = solve_verification_lp(&all_pairs)?.objective;
    let dnj = min_pair * min_pair * max_min_pairs;

    let mut notes = Vec::new();
    if eta0 == 0.0 {
        notes.push(
            "eta0 = 0: some arm cannot separate two hypotheses; the sub-Gaussian \
             stopping rule is unavailable and D1 may be zero"
                .to_string(),
        );
    }
    if d1 == 0.0 {
        notes.push("D1 = 0: the exploration term is unbounded for plain cs".to_string());
    }
    notes.push(
        "DNJ uses the literal displayed expression (squared min pair gap times the \
         max-min pair value); its parenthesization in the source is ambiguous"
            .to_string(),
    );

    Ok(ProblemConstants {
        d0,
        d1,
        de,
        dnj,
        eta0,
        per_hyp_designs,
        notes,
    })
}

/// The three sample-complexity scaling terms, constant factors omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedTerms {
    /// `log(J) / D1` — exploration cost of cs.
    pub exploration_term: f64,
    /// `log(J/delta) / D0` — exploitation cost; dominates as delta -> 0.
    pub exploitation_term: f64,
    /// `log(J) / De` — exploration cost of eps_cs / uniform-style mixing.
    pub uniform_term: f64,
    /// Formulas echoed next to the numbers so the report cannot be misread
    /// as exact bounds.
    pub formulas: [String; 3],
    /// Set when a zero constant made a term infinite.
    pub divided_by_zero: bool,
}

/// Evaluates the scaling terms from the constants. Zero constants yield
/// infinite terms, flagged rather than raised.
pub fn predicted_terms(consts: &ProblemConstants, hyp_count: usize, delta: f64) -> Result<PredictedTerms> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0,1), got {delta}")));
    }
    let j = hyp_count as f64;
    let term = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let exploration_term = term(j.ln(), consts.d1);
    let exploitation_term = term((j / delta).ln(), consts.d0);
    let uniform_term = term(j.ln(), consts.de);
    Ok(PredictedTerms {
        exploration_term,
        exploitation_term,
        uniform_term,
        formulas: [
            "exploration_term = log(J) / D1".to_string(),
            "exploitation_term = log(J/delta) / D0".to_string(),
            "uniform_term = log(J) / De".to_string(),
        ],
        divided_by_zero: exploration_term.is_infinite()
            || exploitation_term.is_infinite()
            || uniform_term.is_infinite(),
    })
}
