//! Dense two-phase simplex for the verification max-min LP.
//!
//! The epigraph form has variables `(p_1..p_n, l)`:
//!
//! ```text
//! max l   s.t.   sum_i G[r][i] p(i) >= l   for every row r,
//!                sum_i p(i) = 1,  p >= 0,  l >= 0.
//! ```
//!
//! Rows are the squared mean gaps against each alternative hypothesis, so all
//! coefficients are nonnegative and the program is always feasible. Instances
//! are tiny (rows and arms in the tens), hence a dense tableau with Bland's
//! rule; degeneracy is heavy (all gap rows have zero right-hand side) and
//! Bland guarantees termination.

/// Pivot tolerance; coefficients below this are treated as zero.
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct LpOutcome {
    /// Optimal arm weights (sum to one).
    pub probs: Vec<f64>,
    /// Optimal epigraph value `l` (the max-min row value).
    pub objective: f64,
    /// Dual mixture over gap rows; certifies optimality via
    /// `max_i (G^T u)_i - objective`.
    pub row_mixture: Vec<f64>,
    /// Certified duality gap `max_i (G^T u)_i - objective` (~0 at an exact
    /// optimum, strictly positive otherwise).
    pub duality_gap: f64,
    /// Simplex pivots performed across both phases.
    pub pivots: usize,
}

struct Tableau {
    t: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    n_cols: usize, // variable columns, excluding rhs
    m: usize,      // constraint rows
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.n_cols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.t[r * (self.n_cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.n_cols)
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut acc = cost[j];
        for (r, &b) in self.basis.iter().enumerate() {
            if cost[b] != 0.0 {
                acc -= cost[b] * self.at(r, j);
            }
        }
        acc
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.at(row, col);
        debug_assert!(piv.abs() > PIVOT_TOL);
        for c in 0..=self.n_cols {
            *self.at_mut(row, c) /= piv;
        }
        for r in 0..self.m {
            if r != row {
                let f = self.at(r, col);
                if f != 0.0 {
                    for c in 0..=self.n_cols {
                        let v = self.at(row, c);
                        *self.at_mut(r, c) -= f * v;
                    }
                }
            }
        }
        self.in_basis[self.basis[row]] = false;
        self.in_basis[col] = true;
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs simplex to optimality for the given (minimization) cost vector.
    /// `barred` columns never enter the basis.
    fn run(&mut self, cost: &[f64], barred: Option<usize>) {
        loop {
            // Bland: entering column = smallest index with negative reduced cost.
            let mut enter = None;
            for j in 0..self.n_cols {
                if Some(j) == barred || self.in_basis[j] {
                    continue;
                }
                if self.reduced_cost(cost, j) < -PIVOT_TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { break };
            // Ratio test; Bland's leaving rule (smallest basis index) on ties.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, j);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < lv - 1e-15
                                || (ratio <= lv + 1e-15 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((lr, _)) = leave else {
                // Unbounded direction; impossible here since l is capped by
                // every gap row and p lives on the simplex.
                break;
            };
            self.pivot(lr, j);
        }
    }
}

/// Solves the epigraph LP for a dense nonnegative gap matrix (`rows x n`,
/// row-major).
pub fn solve_max_min(gaps: &[f64], rows: usize, n: usize) -> LpOutcome {
    assert!(rows >= 1 && n >= 1);
    assert_eq!(gaps.len(), rows * n);

    // Column layout: [p_0..p_{n-1}, l, s_0..s_{rows-1}, a | rhs].
    // Gap row r:  -sum_i G[r][i] p_i + l + s_r = 0
    // Mass row:    sum_i p_i            + a   = 1
    let n_cols = n + 1 + rows + 1;
    let l_col = n;
    let s_col = |r: usize| n + 1 + r;
    let a_col = n + 1 + rows;
    let m = rows + 1;

    let mut tab = Tableau {
        t: vec![0.0; m * (n_cols + 1)],
        basis: Vec::with_capacity(m),
        in_basis: vec![false; n_cols],
        n_cols,
        m,
        pivots: 0,
    };
    for r in 0..rows {
        for i in 0..n {
            *tab.at_mut(r, i) = -gaps[r * n + i];
        }
        *tab.at_mut(r, l_col) = 1.0;
        *tab.at_mut(r, s_col(r)) = 1.0;
    }
    for i in 0..n {
        *tab.at_mut(rows, i) = 1.0;
    }
    *tab.at_mut(rows, a_col) = 1.0;
    *tab.at_mut(rows, n_cols) = 1.0;
    for r in 0..rows {
        tab.basis.push(s_col(r));
        tab.in_basis[s_col(r)] = true;
    }
    tab.basis.push(a_col);
    tab.in_basis[a_col] = true;

    // Phase 1: min a (drive the artificial out of the basis).
    let mut phase1 = vec![0.0; n_cols];
    phase1[a_col] = 1.0;
    tab.run(&phase1, None);
    // Always feasible (uniform p works), so a = 0 now; if still basic at zero,
    // pivot it out on any eligible column.
    if let Some(r) = tab.basis.iter().position(|&b| b == a_col) {
        for j in 0..n_cols {
            if j != a_col && !tab.in_basis[j] && tab.at(r, j).abs() > PIVOT_TOL {
                tab.pivot(r, j);
                break;
            }
        }
    }

    // Phase 2: min -l, artificial barred from re-entering.
    let mut phase2 = vec![0.0; n_cols];
    phase2[l_col] = -1.0;
    tab.run(&phase2, Some(a_col));

    // Primal solution.
    let mut x = vec![0.0; n_cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        x[b] = tab.rhs(r);
    }
    let mut probs: Vec<f64> = x[..n].iter().map(|&v| v.max(0.0)).collect();
    let mass: f64 = probs.iter().sum();
    if mass > 0.0 {
        for p in &mut probs {
            *p /= mass;
        }
    } else {
        probs = vec![1.0 / n as f64; n];
    }
    let objective = x[l_col].max(0.0);

    // Duals: the initial basis columns (s_0..s_{rows-1}) hold B^-1, so
    // y_r = c_B^T (B^-1 e_r); the certificate mixture is u = -y over gap rows.
    let mut row_mixture = vec![0.0; rows];
    for r0 in 0..rows {
        let mut y = 0.0;
        for (r, &b) in tab.basis.iter().enumerate() {
            y += phase2[b] * tab.at(r, s_col(r0));
        }
        row_mixture[r0] = (-y).max(0.0);
    }
    let mix_sum: f64 = row_mixture.iter().sum();
    if mix_sum > PIVOT_TOL {
        for u in &mut row_mixture {
            *u /= mix_sum;
        }
    } else {
        // Degenerate program (objective 0): any single all-zero row certifies.
        if let Some(r0) = (0..rows).find(|&r| (0..n).all(|i| gaps[r * n + i] <= 0.0)) {
            row_mixture[r0] = 1.0;
        }
    }
    // Best single arm against the mixture; weak duality upper bound.
    let mut best_arm_value = f64::NEG_INFINITY;
    for i in 0..n {
        let mut v = 0.0;
        for r in 0..rows {
            v += row_mixture[r] * gaps[r * n + i];
        }
        best_arm_value = best_arm_value.max(v);
    }
    let duality_gap = best_arm_value - objective;

    LpOutcome {
        probs,
        objective,
        row_mixture,
        duality_gap,
        pivots: tab.pivots,
    }
}
