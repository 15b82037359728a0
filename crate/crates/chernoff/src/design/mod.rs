//! The two design-optimization kernels behind every sampling policy:
//!
//! - [`solve_verification_lp`] — the finite max-min verification proportion,
//!   a dense simplex solve over the squared-gap matrix;
//! - [`solve_min_eig_design`] — its continuous limit, maximizing the minimum
//!   eigenvalue of the weighted gradient outer-product matrix (E-optimality)
//!   by Frank-Wolfe;
//!
//! plus Caratheodory support reduction ([`sparsify_design`]) and an exhaustive
//! simplex-grid oracle ([`brute_force_design`]) used by tests.

pub mod eig;
mod frank_wolfe;
mod simplex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::MeansTable;
use crate::rng::Stream;
use crate::{Error, Result};
use eig::{eigen_sym, SymMatrix};

/// Weights below this count as zero support and are truncated out of solver
/// results. Near-degenerate verification programs put slivers of mass
/// (~1e-5) on arms that contribute nothing in practice; the canonical
/// proportions are the truncated ones. Pass `support_eps = 0` to the `_with`
/// variants for exact, certified optima.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-4;

/// A probability mass function over arms with a support threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub probs: Vec<f64>,
    /// Threshold below which a weight counts as zero.
    pub support_eps: f64,
}

impl Design {
    pub fn new(probs: Vec<f64>, support_eps: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDesign("empty design".into()));
        }
        if support_eps < 0.0 {
            return Err(Error::InvalidDesign("support_eps must be >= 0".into()));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDesign(format!("invalid weight {p}")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDesign(format!("weights sum to {sum}")));
        }
        Ok(Self { probs, support_eps })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
            support_eps: DEFAULT_SUPPORT_EPS,
        }
    }

    pub fn point_mass(n: usize, arm: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[arm] = 1.0;
        Self {
            probs,
            support_eps: DEFAULT_SUPPORT_EPS,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices carrying more than `support_eps` mass.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > self.support_eps)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > self.support_eps).count()
    }

    /// Zeroes weights at or below `eps` and renormalizes. Keeps the argmax
    /// atom when everything falls below the threshold.
    pub fn truncated(&self, eps: f64) -> Design {
        let mut probs: Vec<f64> = self
            .probs
            .iter()
            .map(|&p| if p > eps { p } else { 0.0 })
            .collect();
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            let mut best = 0;
            for (i, &p) in self.probs.iter().enumerate() {
                if p > self.probs[best] {
                    best = i;
                }
            }
            return Design::point_mass(self.probs.len(), best);
        }
        for p in &mut probs {
            *p /= sum;
        }
        Design {
            probs,
            support_eps: eps,
        }
    }

    /// Convex mixture with the uniform design: `(1-w) self + w uniform`.
    pub fn mix_uniform(&self, w: f64) -> Design {
        let n = self.probs.len() as f64;
        Design {
            probs: self.probs.iter().map(|&p| (1.0 - w) * p + w / n).collect(),
            support_eps: self.support_eps,
        }
    }

    /// Samples an arm index.
    pub fn sample(&self, rng: &mut Stream) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// Solver status flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Verification LP with a zero-valued row: no design separates the
    /// hypotheses, the uniform design is returned with objective 0.
    Degenerate,
    /// Gradients do not span the parameter space; best-effort design with
    /// objective 0. The caller decides the fallback.
    NonSpanning,
}

/// A solved design with its objective value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSolution {
    pub design: Design,
    /// Finite case: attained min-row value of the returned design.
    /// Continuous case: attained minimum eigenvalue.
    pub objective: f64,
    pub iters: usize,
    pub converged: bool,
    pub status: SolveStatus,
    /// Certified duality gap of the pre-truncation LP optimum, or the final
    /// Frank-Wolfe gap (an overestimate under eigenvalue multiplicity).
    pub dual_gap: f64,
}

/// The squared-gap matrix of a verification program: one row per alternative
/// hypothesis, one column per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    gaps_sq: Vec<f64>,
    rows: usize,
    n: usize,
}

impl LpInstance {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDesign("need at least one gap row".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidDesign("need at least one arm".into()));
        }
        let mut gaps_sq = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::InvalidDesign("ragged gap matrix".into()));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDesign(format!("invalid gap {v}")));
                }
                gaps_sq.push(v);
            }
        }
        Ok(Self {
            gaps_sq,
            rows: rows.len(),
            n,
        })
    }

    /// Rows `(mu_i(hyp) - mu_i(hyp'))^2` for every alternative `hyp' != hyp`.
    pub fn verification(means: &MeansTable, hyp: usize) -> Result<Self> {
        let j = means.hyp_count();
        if hyp >= j {
            return Err(Error::HypOutOfRange { hyp, j });
        }
        let n = means.arm_count();
        let mut gaps_sq = Vec::with_capacity((j - 1) * n);
        for alt in 0..j {
            if alt == hyp {
                continue;
            }
            for arm in 0..n {
                let g = means.mean(arm, hyp) - means.mean(arm, alt);
                gaps_sq.push(g * g);
            }
        }
        Ok(Self {
            gaps_sq,
            rows: j - 1,
            n,
        })
    }

    /// Rows for every unordered hypothesis pair; used by the two-phase
    /// exploration constant.
    pub fn all_pairs(means: &MeansTable) -> Result<Self> {
        let j = means.hyp_count();
        let n = means.arm_count();
        let mut gaps_sq = Vec::new();
        let mut rows = 0;
        for a in 0..j {
            for b in (a + 1)..j {
                for arm in 0..n {
                    let g = means.mean(arm, a) - means.mean(arm, b);
                    gaps_sq.push(g * g);
                }
                rows += 1;
            }
        }
        Ok(Self { gaps_sq, rows, n })
    }

    pub fn arm_count(&self) -> usize {
        self.n
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.gaps_sq[r * self.n..(r + 1) * self.n]
    }

    /// `min_r (G p)_r` — the objective of a candidate design.
    pub fn min_row_value(&self, probs: &[f64]) -> f64 {
        let mut min = f64::INFINITY;
        for r in 0..self.rows {
            let row = self.row(r);
            let v: f64 = row.iter().zip(probs).map(|(g, p)| g * p).sum();
            if v < min {
                min = v;
            }
        }
        min
    }

    fn has_zero_row(&self) -> bool {
        (0..self.rows).any(|r| self.row(r).iter().all(|&g| g == 0.0))
    }
}

/// Gradient vectors of the mean functions at the current estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigInstance {
    grads: Vec<f64>, // row-major n x d
    n: usize,
    d: usize,
    spanning: bool,
}

impl EigInstance {
    pub fn new(grads: Vec<Vec<f64>>) -> Result<Self> {
        if grads.is_empty() {
            return Err(Error::InvalidDesign("need at least one gradient".into()));
        }
        let d = grads[0].len();
        if d == 0 {
            return Err(Error::InvalidDesign("zero-dimensional gradients".into()));
        }
        let n = grads.len();
        let mut flat = Vec::with_capacity(n * d);
        for g in &grads {
            if g.len() != d {
                return Err(Error::InvalidDesign("ragged gradient set".into()));
            }
            for &v in g {
                if !v.is_finite() {
                    return Err(Error::InvalidDesign("non-finite gradient".into()));
                }
                flat.push(v);
            }
        }
        // Spanning test: rank of the set equals the rank of sum g g^T.
        let mut gram = SymMatrix::zeros(d);
        for i in 0..n {
            gram.add_outer(&flat[i * d..(i + 1) * d], 1.0);
        }
        let pairs = eigen_sym(&gram);
        let max = pairs.max_value().max(0.0);
        let min = pairs.min_pair().0;
        let spanning = min > 1e-10 * max.max(1e-300) && max > 0.0;
        Ok(Self {
            grads: flat,
            n,
            d,
            spanning,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn spanning(&self) -> bool {
        self.spanning
    }

    pub fn grad(&self, i: usize) -> &[f64] {
        &self.grads[i * self.d..(i + 1) * self.d]
    }

    /// `lambda_min(sum_i p(i) g_i g_i^T)` — the objective of a candidate
    /// design.
    pub fn min_eig_value(&self, probs: &[f64]) -> f64 {
        let mut m = SymMatrix::zeros(self.d);
        for i in 0..self.n {
            if probs[i] != 0.0 {
                m.add_outer(self.grad(i), probs[i]);
            }
        }
        eigen_sym(&m).min_pair().0
    }
}

/// Solves the verification LP with the default support truncation.
pub fn solve_verification_lp(inst: &LpInstance) -> Result<DesignSolution> {
    solve_verification_lp_with(inst, DEFAULT_SUPPORT_EPS)
}

/// Solves the verification LP; weights at or below `support_eps` are zeroed
/// and the design renormalized, with the objective recomputed on the
/// truncated design. `support_eps = 0` returns the exact certified optimum.
pub fn solve_verification_lp_with(inst: &LpInstance, support_eps: f64) -> Result<DesignSolution> {
    if inst.has_zero_row() {
        // Some alternative is indistinguishable under every arm.
        return Ok(DesignSolution {
            design: Design::uniform(inst.n),
            objective: 0.0,
            iters: 0,
            converged: true,
            status: SolveStatus::Degenerate,
            dual_gap: 0.0,
        });
    }
    let out = simplex::solve_max_min(&inst.gaps_sq, inst.rows, inst.n);
    debug_assert!(
        (out.objective - inst.min_row_value(&out.probs)).abs() <= 1e-9 * (1.0 + out.objective),
        "simplex objective inconsistent with its own design"
    );
    debug_assert!(out.row_mixture.iter().all(|&u| u >= 0.0));
    let mut design = Design::new(out.probs, support_eps)?;
    if support_eps > 0.0 {
        design = design.truncated(support_eps);
    }
    let objective = inst.min_row_value(&design.probs);
    let status = if objective <= 0.0 {
        SolveStatus::Degenerate
    } else {
        SolveStatus::Optimal
    };
    Ok(DesignSolution {
        design,
        objective,
        iters: out.pivots,
        converged: out.duality_gap.abs() <= 1e-8,
        status,
        dual_gap: out.duality_gap,
    })
}

/// Maximizes the minimum eigenvalue of the weighted gradient outer-product
/// matrix over the simplex. Non-spanning gradient sets yield a best-effort
/// uniform design with objective 0 and the `NonSpanning` status; the caller
/// decides the fallback.
pub fn solve_min_eig_design(
    inst: &EigInstance,
    max_iters: usize,
    tol: f64,
) -> Result<DesignSolution> {
    let uniform = vec![1.0 / inst.n as f64; inst.n];
    solve_min_eig_design_from(inst, &uniform, max_iters, tol)
}

/// Warm-started variant used by the regression loop.
pub fn solve_min_eig_design_from(
    inst: &EigInstance,
    init: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<DesignSolution> {
    if init.len() != inst.n {
        return Err(Error::InvalidDesign("warm start has wrong length".into()));
    }
    if !inst.spanning {
        return Ok(DesignSolution {
            design: Design::uniform(inst.n),
            objective: 0.0,
            iters: 0,
            converged: false,
            status: SolveStatus::NonSpanning,
            dual_gap: f64::INFINITY,
        });
    }
    let out = frank_wolfe::maximize_min_eig(&inst.grads, inst.n, inst.d, init, max_iters, tol);
    let design = Design {
        probs: out.probs,
        support_eps: DEFAULT_SUPPORT_EPS,
    }
    .truncated(DEFAULT_SUPPORT_EPS);
    let objective = inst.min_eig_value(&design.probs);
    debug_assert!(
        (objective - out.objective).abs() <= 1e-2 * (1.0 + out.objective.abs()),
        "support truncation moved the eigenvalue objective too far"
    );
    Ok(DesignSolution {
        design,
        objective,
        iters: out.iters,
        converged: out.converged,
        status: SolveStatus::Optimal,
        dual_gap: out.gap,
    })
}

/// Either optimization target, for the oracle and the sparsifier.
#[derive(Debug, Clone, Copy)]
pub enum DesignTarget<'a> {
    Lp(&'a LpInstance),
    Eig(&'a EigInstance),
}

impl DesignTarget<'_> {
    pub fn arm_count(&self) -> usize {
        match self {
            DesignTarget::Lp(i) => i.arm_count(),
            DesignTarget::Eig(i) => i.arm_count(),
        }
    }

    pub fn objective(&self, probs: &[f64]) -> f64 {
        match self {
            DesignTarget::Lp(i) => i.min_row_value(probs),
            DesignTarget::Eig(i) => i.min_eig_value(probs),
        }
    }
}

const BRUTE_FORCE_MAX_ARMS: usize = 6;

/// Exhaustive search over the simplex grid `{k/r}`; returns the best grid
/// point. Test oracle only — cost grows as `C(r + n - 1, n - 1)`, so the arm
/// count is capped. Partial objective state is carried through the recursion
/// so each leaf costs O(rows) (finite case) or one small eigensolve
/// (continuous case).
pub fn brute_force_design(
    target: DesignTarget<'_>,
    grid_resolution: usize,
) -> Result<DesignSolution> {
    let n = target.arm_count();
    if n > BRUTE_FORCE_MAX_ARMS {
        return Err(Error::GridTooLarge {
            n,
            max: BRUTE_FORCE_MAX_ARMS,
        });
    }
    let r = grid_resolution.max(1);
    let mut best_units = vec![0usize; n];
    best_units[0] = r;
    let mut best_val = f64::NEG_INFINITY;
    let mut units = vec![0usize; n];

    match target {
        DesignTarget::Lp(inst) => {
            let mut partial = vec![0.0f64; inst.row_count()];
            grid_lp(
                inst,
                r,
                0,
                r,
                &mut partial,
                &mut units,
                &mut best_val,
                &mut best_units,
            );
        }
        DesignTarget::Eig(inst) => {
            let mut partial = SymMatrix::zeros(inst.dim());
            grid_eig(
                inst,
                r,
                0,
                r,
                &mut partial,
                &mut units,
                &mut best_val,
                &mut best_units,
            );
        }
    }

    let probs: Vec<f64> = best_units.iter().map(|&k| k as f64 / r as f64).collect();
    // Evaluate the winner from scratch; the recursion's add/subtract updates
    // accumulate rounding.
    let objective = target.objective(&probs);
    Ok(DesignSolution {
        design: Design::new(probs, DEFAULT_SUPPORT_EPS)?,
        objective,
        iters: 0,
        converged: true,
        status: if objective > 0.0 {
            SolveStatus::Optimal
        } else {
            SolveStatus::Degenerate
        },
        dual_gap: f64::NAN,
    })
}

#[allow(clippy::too_many_arguments)]
fn grid_lp(
    inst: &LpInstance,
    r: usize,
    idx: usize,
    remaining: usize,
    partial: &mut [f64],
    units: &mut [usize],
    best_val: &mut f64,
    best_units: &mut [usize],
) {
    let n = inst.arm_count();
    if idx == n - 1 {
        let w = remaining as f64 / r as f64;
        let mut min = f64::INFINITY;
        for (row, acc) in partial.iter().enumerate() {
            let v = acc + w * inst.row(row)[n - 1];
            if v < min {
                min = v;
            }
        }
        if min > *best_val {
            *best_val = min;
            units[idx] = remaining;
            best_units.copy_from_slice(units);
        }
        return;
    }
    for k in 0..=remaining {
        let w = k as f64 / r as f64;
        units[idx] = k;
        if k > 0 {
            for (row, acc) in partial.iter_mut().enumerate() {
                *acc += w * inst.row(row)[idx];
            }
        }
        grid_lp(inst, r, idx + 1, remaining - k, partial, units, best_val, best_units);
        if k > 0 {
            for (row, acc) in partial.iter_mut().enumerate() {
                *acc -= w * inst.row(row)[idx];
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn grid_eig(
    inst: &EigInstance,
    r: usize,
    idx: usize,
    remaining: usize,
    partial: &mut SymMatrix,
    units: &mut [usize],
    best_val: &mut f64,
    best_units: &mut [usize],
) {
    let n = inst.arm_count();
    if idx == n - 1 {
        let w = remaining as f64 / r as f64;
        let mut m = partial.clone();
        if remaining > 0 {
            m.add_outer(inst.grad(n - 1), w);
        }
        let v = eigen_sym(&m).min_pair().0;
        if v > *best_val {
            *best_val = v;
            units[idx] = remaining;
            best_units.copy_from_slice(units);
        }
        return;
    }
    for k in 0..=remaining {
        let w = k as f64 / r as f64;
        units[idx] = k;
        if k > 0 {
            partial.add_outer(inst.grad(idx), w);
        }
        grid_eig(inst, r, idx + 1, remaining - k, partial, units, best_val, best_units);
        if k > 0 {
            partial.add_outer(inst.grad(idx), -w);
        }
    }
}

/// Support reduction in two stages, both objective-safe:
///
/// 1. Caratheodory: while the support's moment vectors (plus mass) are
///    linearly dependent, step along a null vector until an atom hits zero.
///    The moment image — hence the objective — is preserved exactly, and the
///    support lands at or below `D + 1` atoms (`D` = gap-row count for the
///    finite case, `d(d+1)/2` for the continuous one), collapsing duplicates
///    entirely.
/// 2. Drop-and-resolve: greedily remove the lightest atoms, re-solving the
///    design restricted to the remaining support, keeping each removal only
///    if the attained objective gives up no more than half the tolerance.
///
/// "Preserved" is one-sided: the result never sits more than `1e-6` below
/// the input's objective, while a restricted re-solve is free to land above
/// it. Returns the input unchanged if the reduction fails numerically or
/// would degrade the objective beyond the tolerance.
pub fn sparsify_design(design: &Design, target: DesignTarget<'_>) -> Design {
    let n = design.len();
    if target.arm_count() != n {
        return design.clone();
    }
    // Moment map per atom, plus the mass row.
    let map_dim = match target {
        DesignTarget::Lp(inst) => inst.row_count(),
        DesignTarget::Eig(inst) => inst.dim() * (inst.dim() + 1) / 2,
    };
    let moment = |i: usize, out: &mut Vec<f64>| {
        out.clear();
        match target {
            DesignTarget::Lp(inst) => {
                for r in 0..inst.row_count() {
                    out.push(inst.row(r)[i]);
                }
            }
            DesignTarget::Eig(inst) => {
                let g = inst.grad(i);
                for a in 0..g.len() {
                    for b in a..g.len() {
                        out.push(g[a] * g[b]);
                    }
                }
            }
        }
        out.push(1.0); // mass
    };

    let original_objective = target.objective(&design.probs);
    let mut support: Vec<usize> = design
        .probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut weights: Vec<f64> = support.iter().map(|&i| design.probs[i]).collect();
    let target_size = map_dim + 1;

    let mut col = Vec::new();
    let mut guard = 0;
    // Keep reducing while the moment vectors stay linearly dependent; this
    // lands at or below the Caratheodory bound and fully collapses duplicate
    // atoms.
    while support.len() > 1 {
        guard += 1;
        if guard > n + 8 {
            return design.clone();
        }
        let k = support.len();
        let rows = map_dim + 1;
        let mut a = vec![0.0; rows * k];
        for (c, &i) in support.iter().enumerate() {
            moment(i, &mut col);
            for (r, &v) in col.iter().enumerate() {
                a[r * k + c] = v;
            }
        }
        let Some(nu) = null_vector(&mut a, rows, k) else {
            if support.len() > target_size {
                // Dependence is certain above the bound; elimination failing
                // there is a numerical problem, so hand back the input.
                return design.clone();
            }
            break;
        };
        // Step along nu, zeroing the first coordinate that hits the boundary.
        let mut t = f64::INFINITY;
        for (c, &v) in nu.iter().enumerate() {
            if v > 1e-14 {
                t = t.min(weights[c] / v);
            }
        }
        if !t.is_finite() {
            return design.clone();
        }
        let mut new_support = Vec::with_capacity(k - 1);
        let mut new_weights = Vec::with_capacity(k - 1);
        for c in 0..k {
            let w = weights[c] - t * nu[c];
            if w <= 1e-14 {
                continue;
            }
            new_support.push(support[c]);
            new_weights.push(w);
        }
        if new_support.len() >= k || new_support.is_empty() {
            return design.clone();
        }
        support = new_support;
        weights = new_weights;
    }

    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return design.clone();
    }
    for w in &mut weights {
        *w /= total;
    }

    // Stage 2: drop light atoms and re-solve on the remaining support.
    drop_and_resolve(&mut support, &mut weights, target, original_objective);

    let mut probs = vec![0.0; n];
    for (&i, &w) in support.iter().zip(&weights) {
        probs[i] = w;
    }
    let reduced = Design {
        probs,
        support_eps: design.support_eps,
    };
    let new_objective = target.objective(&reduced.probs);
    if new_objective < original_objective - 1e-6 {
        return design.clone();
    }
    reduced
}

/// Greedily removes the lightest atoms while a restricted re-solve gives up
/// at most half the sparsification tolerance. Work is budgeted: at most three
/// candidates per round and 96 restricted solves overall.
fn drop_and_resolve(
    support: &mut Vec<usize>,
    weights: &mut Vec<f64>,
    target: DesignTarget<'_>,
    original_objective: f64,
) {
    let tolerance = 5e-7;
    let mut solve_budget = 96usize;
    loop {
        if support.len() <= 1 || solve_budget == 0 {
            return;
        }
        // Candidates in ascending weight; try a few of the lightest.
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
        let mut dropped = false;
        for &cand in order.iter().take(3) {
            if solve_budget == 0 {
                break;
            }
            solve_budget -= 1;
            let sub_support: Vec<usize> = support
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != cand)
                .map(|(_, &i)| i)
                .collect();
            let kept: f64 = 1.0 - weights[cand];
            if kept <= 0.0 {
                continue;
            }
            let warm: Vec<f64> = weights
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != cand)
                .map(|(_, &w)| w / kept)
                .collect();
            let Some((sub_weights, objective)) =
                resolve_restricted(target, &sub_support, &warm)
            else {
                continue;
            };
            if objective >= original_objective - tolerance {
                *support = sub_support;
                *weights = sub_weights;
                dropped = true;
                break;
            }
        }
        if !dropped {
            return;
        }
    }
}

/// Re-solves the design restricted to `sub_support`, warm-started at `warm`.
/// Returns the restricted weights (aligned with `sub_support`) and the
/// attained objective.
fn resolve_restricted(
    target: DesignTarget<'_>,
    sub_support: &[usize],
    warm: &[f64],
) -> Option<(Vec<f64>, f64)> {
    match target {
        DesignTarget::Lp(inst) => {
            let rows = inst.row_count();
            let k = sub_support.len();
            let mut gaps = vec![0.0; rows * k];
            for r in 0..rows {
                let row = inst.row(r);
                for (c, &i) in sub_support.iter().enumerate() {
                    gaps[r * k + c] = row[i];
                }
            }
            let out = simplex::solve_max_min(&gaps, rows, k);
            Some((out.probs, out.objective))
        }
        DesignTarget::Eig(inst) => {
            let d = inst.dim();
            let k = sub_support.len();
            let mut grads = Vec::with_capacity(k * d);
            for &i in sub_support {
                grads.extend_from_slice(inst.grad(i));
            }
            let out = frank_wolfe::maximize_min_eig(&grads, k, d, warm, 200, 1e-10);
            Some((out.probs, out.objective))
        }
    }
}

/// One null-space vector of a `rows x cols` matrix with `cols > rank`,
/// via Gaussian elimination with partial pivoting. Returns `None` when the
/// elimination cannot certify a free column.
fn null_vector(a: &mut [f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut is_pivot_col = vec![false; cols];
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        // Partial pivot in column c among rows rank..
        let mut best = rank;
        for r in rank..rows {
            if a[r * cols + c].abs() > a[best * cols + c].abs() {
                best = r;
            }
        }
        if a[best * cols + c].abs() < 1e-12 {
            continue;
        }
        if best != rank {
            for j in 0..cols {
                a.swap(rank * cols + j, best * cols + j);
            }
        }
        let piv = a[rank * cols + c];
        for j in 0..cols {
            a[rank * cols + j] /= piv;
        }
        for r in 0..rows {
            if r != rank {
                let f = a[r * cols + c];
                if f != 0.0 {
                    for j in 0..cols {
                        a[r * cols + j] -= f * a[rank * cols + j];
                    }
                }
            }
        }
        pivot_col_of_row[rank] = c;
        is_pivot_col[c] = true;
        rank += 1;
    }
    let free = (0..cols).find(|&c| !is_pivot_col[c])?;
    // x_free = 1, pivot variables read off the eliminated matrix.
    let mut nu = vec![0.0; cols];
    nu[free] = 1.0;
    for r in 0..rank {
        let pc = pivot_col_of_row[r];
        nu[pc] = -a[r * cols + free];
    }
    Some(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    fn example1_means() -> MeansTable {
        MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]]).unwrap()
    }

    #[test]
    fn example1_proportions_match_the_closed_form() {
        let means = example1_means();
        // Verify the true hypothesis: all mass on arm 1, objective 0.999^2.
        let sol = solve_verification_lp(&LpInstance::verification(&means, 0).unwrap()).unwrap();
        assert!((sol.design.probs[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective - 0.999f64.powi(2)).abs() < 1e-12);
        // Verifying either alternative lands on arm 2 after truncation.
        for hyp in [1, 2] {
            let sol =
                solve_verification_lp(&LpInstance::verification(&means, hyp).unwrap()).unwrap();
            assert!(sol.design.probs[0].abs() < 1e-9, "hyp {hyp}: {:?}", sol.design.probs);
            assert!((sol.design.probs[1] - 1.0).abs() < 1e-9);
            assert!((sol.objective - 4e-6).abs() < 1e-12, "obj = {}", sol.objective);
        }
    }

    #[test]
    fn example1_exact_solution_is_certified() {
        // Without truncation the alternatives receive a ~1.2e-5 sliver on
        // arm 1; the dual certificate must still close.
        let means = example1_means();
        for hyp in [1, 2] {
            let sol =
                solve_verification_lp_with(&LpInstance::verification(&means, hyp).unwrap(), 0.0)
                    .unwrap();
            assert!(sol.dual_gap.abs() <= 1e-8);
            assert!(sol.design.probs[0] > 1e-6 && sol.design.probs[0] < 1e-4);
            assert!((sol.objective - 1.6e-5).abs() < 1e-7);
        }
    }

    #[test]
    fn single_alternative_row() {
        let inst = LpInstance::new(vec![vec![4.0, 1.0]]).unwrap();
        let sol = solve_verification_lp(&inst).unwrap();
        assert!((sol.design.probs[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_instance_degenerates_to_uniform() {
        let inst = LpInstance::new(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let sol = solve_verification_lp(&inst).unwrap();
        assert_eq!(sol.status, SolveStatus::Degenerate);
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.design.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn lp_matches_grid_oracle_on_random_instances() {
        let mut rng = stream_from_seed(404);
        for _ in 0..10 {
            let n = rng.gen_range(2..=4usize);
            let rows = rng.gen_range(1..=4usize);
            let inst = LpInstance::new(
                (0..rows)
                    .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0f64)).collect())
                    .collect(),
            )
            .unwrap();
            let sol = solve_verification_lp_with(&inst, 0.0).unwrap();
            let grid = brute_force_design(DesignTarget::Lp(&inst), 200).unwrap();
            assert!(sol.objective >= grid.objective - 1e-9, "solver below grid");
            assert!(sol.objective <= grid.objective + 1e-2, "grid gap too wide");
            assert!(sol.dual_gap.abs() <= 1e-8);
        }
    }

    #[test]
    fn min_eig_scalar_and_orthonormal_cases() {
        let inst = EigInstance::new(vec![vec![2.0], vec![1.0], vec![0.5]]).unwrap();
        let sol = solve_min_eig_design(&inst, 500, 1e-9).unwrap();
        assert!((sol.design.probs[0] - 1.0).abs() < 1e-6);
        assert!((sol.objective - 4.0).abs() < 1e-6);

        let inst = EigInstance::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sol = solve_min_eig_design(&inst, 500, 1e-9).unwrap();
        assert!((sol.design.probs[0] - 0.5).abs() < 1e-6);
        assert!((sol.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn min_eig_three_arm_geometry_matches_grid() {
        // Optimal/informative/less-informative geometry in the plane.
        let inst = EigInstance::new(vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.71, 0.71],
        ])
        .unwrap();
        let sol = solve_min_eig_design(&inst, 2000, 1e-9).unwrap();
        let grid = brute_force_design(DesignTarget::Eig(&inst), 100).unwrap();
        assert!(
            (sol.objective - grid.objective).abs() < 1e-2,
            "fw = {}, grid = {}",
            sol.objective,
            grid.objective
        );
        assert!(sol.objective >= grid.objective - 1e-2);
    }

    #[test]
    fn non_spanning_gradients_are_flagged() {
        let inst = EigInstance::new(vec![vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(!inst.spanning());
        let sol = solve_min_eig_design(&inst, 100, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::NonSpanning);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn brute_force_guards_arm_count() {
        let inst = LpInstance::new(vec![vec![1.0; 7]]).unwrap();
        assert!(matches!(
            brute_force_design(DesignTarget::Lp(&inst), 10),
            Err(Error::GridTooLarge { .. })
        ));
        let single = LpInstance::new(vec![vec![1.0]]).unwrap();
        let sol = brute_force_design(DesignTarget::Lp(&single), 10).unwrap();
        assert_eq!(sol.design.probs, vec![1.0]);
    }

    #[test]
    fn sparsify_is_a_fixed_point_on_sparse_designs() {
        let inst = EigInstance::new(vec![vec![1.0], vec![0.5], vec![0.2]]).unwrap();
        let d = Design::new(vec![1.0, 0.0, 0.0], 1e-4).unwrap();
        let s = sparsify_design(&d, DesignTarget::Eig(&inst));
        assert_eq!(s.probs, d.probs);
    }

    #[test]
    fn sparsify_collapses_duplicate_gradients() {
        let grads: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0, 1.0]).collect();
        let inst = EigInstance::new(grads).unwrap();
        let d = Design::uniform(10);
        let s = sparsify_design(&d, DesignTarget::Eig(&inst));
        assert!(s.support_size() <= 2, "support = {:?}", s.support());
        assert!(
            (inst.min_eig_value(&s.probs) - inst.min_eig_value(&d.probs)).abs() < 1e-9
        );
    }

    #[test]
    fn sparsify_reduces_symmetric_duplicates_with_objective_preserved() {
        // Four arms in d = 2 with duplicated gradients; support must fall to
        // <= 3 with the objective intact.
        let inst = EigInstance::new(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let d = Design::uniform(4);
        let before = inst.min_eig_value(&d.probs);
        let s = sparsify_design(&d, DesignTarget::Eig(&inst));
        assert!(s.support_size() <= 3, "support = {:?}", s.support());
        let after = inst.min_eig_value(&s.probs);
        assert!((before - after).abs() < 1e-9);
        // And a rerun of the solver confirms nothing was lost.
        let resolved = solve_min_eig_design(&inst, 500, 1e-9).unwrap();
        assert!(after >= resolved.objective - 1e-6);
    }

    #[test]
    fn scale_equivariance_of_the_lp() {
        let rows = vec![vec![0.3, 0.9], vec![0.8, 0.1]];
        let inst = LpInstance::new(rows.clone()).unwrap();
        let scaled =
            LpInstance::new(rows.iter().map(|r| r.iter().map(|v| v * 7.5).collect()).collect())
                .unwrap();
        let a = solve_verification_lp_with(&inst, 0.0).unwrap();
        let b = solve_verification_lp_with(&scaled, 0.0).unwrap();
        assert!((b.objective - 7.5 * a.objective).abs() < 1e-9);
        for (x, y) in a.design.probs.iter().zip(&b.design.probs) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn eig_rotation_invariance() {
        // Rotating all gradients by a fixed orthogonal map leaves the
        // objective unchanged.
        let theta: f64 = 0.7;
        let (c, s) = (theta.cos(), theta.sin());
        let base = vec![vec![1.0, 0.2], vec![-0.3, 0.9], vec![0.6, 0.6]];
        let rotated: Vec<Vec<f64>> = base
            .iter()
            .map(|g| vec![c * g[0] - s * g[1], s * g[0] + c * g[1]])
            .collect();
        let a = solve_min_eig_design(&EigInstance::new(base).unwrap(), 2000, 1e-10).unwrap();
        let b = solve_min_eig_design(&EigInstance::new(rotated).unwrap(), 2000, 1e-10).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9, "{} vs {}", a.objective, b.objective);
    }
}
