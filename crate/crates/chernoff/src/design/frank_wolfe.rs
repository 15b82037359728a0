//! Frank-Wolfe maximization of the minimum eigenvalue of the weighted
//! gradient outer-product matrix over the probability simplex.
//!
//! The objective `p -> lambda_min(sum_i p(i) g_i g_i^T)` is concave, so
//! conditional gradient steps with an exact line search converge from any
//! start and every iterate stays on the simplex. The ascent direction uses the
//! subgradient `(v^T g_i)^2` where `v` is a unit eigenvector of the smallest
//! eigenvalue; the eigenvector choice is the deterministic one returned by the
//! Jacobi sweep.
//!
//! When the smallest eigenvalue is multiple, no single vertex direction may
//! improve the objective even though a mixture does (the subgradient is not
//! unique). A stalled iteration therefore falls back to a fan step: sample
//! directions spanning the tied eigenspace, solve the small max-min program
//! over the sampled quadratic forms, and line-search toward the resulting
//! mixture.

use super::eig::{eigen_sym, EigenPairs, SymMatrix};
use super::simplex;
use crate::rng::stream_from_seed;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct FwOutcome {
    pub probs: Vec<f64>,
    pub objective: f64,
    /// Frank-Wolfe gap `max_i (v^T g_i)^2 - lambda_min` at the final iterate;
    /// an overestimate when the smallest eigenvalue is multiple.
    pub gap: f64,
    pub iters: usize,
    pub converged: bool,
}

fn weighted_outer(grads: &[f64], n: usize, d: usize, probs: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(d);
    for i in 0..n {
        if probs[i] > 0.0 {
            m.add_outer(&grads[i * d..(i + 1) * d], probs[i]);
        }
    }
    m
}

/// Exact line search for `gamma -> lambda_min((1-gamma) M + gamma g g^T)` on
/// [0, 1]. The restriction of a concave function to a segment is concave, so
/// ternary search converges.
fn line_search(m: &SymMatrix, g: &[f64]) -> (f64, f64) {
    let eval = |gamma: f64| {
        let mut blend = m.clone();
        blend.scale(1.0 - gamma);
        blend.add_outer(g, gamma);
        eigen_sym(&blend).min_pair().0
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..36 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let gamma = 0.5 * (lo + hi);
    (gamma, eval(gamma))
}

/// Line search for `gamma -> lambda_min((1-gamma) M + gamma T)` on [0, 1].
fn line_search_toward(m: &SymMatrix, target: &SymMatrix) -> (f64, f64) {
    let eval = |gamma: f64| {
        let mut blend = m.clone();
        blend.scale(1.0 - gamma);
        for (v, &t) in blend.data.iter_mut().zip(&target.data) {
            *v += gamma * t;
        }
        eigen_sym(&blend).min_pair().0
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..36 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let gamma = 0.5 * (lo + hi);
    (gamma, eval(gamma))
}

/// Stall recovery under eigenvalue multiplicity: sample unit directions in
/// the tied eigenspace, pick the arm mixture maximizing the worst sampled
/// quadratic form (a small max-min program), and line-search toward it.
/// Returns `(mixture, gamma, attained lambda_min)` or `None` when the
/// eigenvalue is simple or no mixture helps.
fn fan_step(
    pairs: &EigenPairs,
    lambda: f64,
    gap: f64,
    grads: &[f64],
    n: usize,
    d: usize,
    m: &SymMatrix,
) -> Option<(Vec<f64>, f64, f64)> {
    // Eigenvalues within the gap scale re-order under any step worth taking,
    // so they all belong to the fan. The relevant spread is twice the gap
    // (the coupled eigenvalue sits above lambda by up to 2 x off-diagonal
    // coupling), padded a little.
    let tol = (1e-9 * (1.0 + lambda.abs())).max(2.5 * gap);
    let tied: Vec<usize> = (0..pairs.values.len())
        .filter(|&k| pairs.values[k] <= lambda + tol)
        .collect();
    if tied.len() < 2 {
        return None;
    }
    // Sampled unit directions spanning the tied eigenspace. Two tied
    // eigenvalues get a deterministic angular fan; higher multiplicities get
    // a capped set of fixed-seed combinations.
    let mut directions: Vec<Vec<f64>> = Vec::new();
    if tied.len() == 2 {
        let q1 = &pairs.vectors[tied[0]];
        let q2 = &pairs.vectors[tied[1]];
        let k = 17;
        for step in 0..k {
            let phi = std::f64::consts::PI * step as f64 / k as f64;
            let (c, s) = (phi.cos(), phi.sin());
            directions.push((0..d).map(|j| c * q1[j] + s * q2[j]).collect());
        }
    } else {
        let mut rng = stream_from_seed(0xfa57_57e9);
        while directions.len() < 24 {
            let coeffs: Vec<f64> = tied.iter().map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let norm: f64 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            let mut v = vec![0.0; d];
            for (&k, &c) in tied.iter().zip(&coeffs) {
                for (vj, &qj) in v.iter_mut().zip(&pairs.vectors[k]) {
                    *vj += c / norm * qj;
                }
            }
            directions.push(v);
        }
    }
    // Score every arm along every direction, then restrict the max-min
    // program to a small candidate set (the top scorers overall plus each
    // direction's best arm). The program only generates a direction; the
    // line search validates it, so the restriction is safe.
    let rows = directions.len();
    let mut scores = vec![0.0; rows * n];
    let mut top_overall: Vec<(f64, usize)> = (0..n).map(|i| (0.0, i)).collect();
    for (r, v) in directions.iter().enumerate() {
        for i in 0..n {
            let gi = &grads[i * d..(i + 1) * d];
            let dot: f64 = gi.iter().zip(v).map(|(a, b)| a * b).sum();
            let s = dot * dot;
            scores[r * n + i] = s;
            if s > top_overall[i].0 {
                top_overall[i].0 = s;
            }
        }
    }
    let mut candidates: Vec<usize> = Vec::new();
    if n <= 64 {
        candidates.extend(0..n);
    } else {
        top_overall.sort_by(|a, b| b.0.total_cmp(&a.0));
        candidates.extend(top_overall.iter().take(48).map(|&(_, i)| i));
        for r in 0..rows {
            let best = (0..n)
                .max_by(|&a, &b| scores[r * n + a].total_cmp(&scores[r * n + b]))
                .unwrap();
            if !candidates.contains(&best) {
                candidates.push(best);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
    }
    let k = candidates.len();
    let mut gaps = vec![0.0; rows * k];
    for r in 0..rows {
        for (c, &i) in candidates.iter().enumerate() {
            gaps[r * k + c] = scores[r * n + i];
        }
    }
    let sub = simplex::solve_max_min(&gaps, rows, k).probs;
    let mut mixture = vec![0.0; n];
    for (c, &i) in candidates.iter().enumerate() {
        mixture[i] = sub[c];
    }
    let mut m_s = SymMatrix::zeros(d);
    for (i, &s) in mixture.iter().enumerate() {
        if s > 0.0 {
            m_s.add_outer(&grads[i * d..(i + 1) * d], s);
        }
    }
    let (gamma, new_lambda) = line_search_toward(m, &m_s);
    Some((mixture, gamma, new_lambda))
}

/// Maximizes `lambda_min(sum p(i) g_i g_i^T)` from the given start point.
pub fn maximize_min_eig(
    grads: &[f64],
    n: usize,
    d: usize,
    init: &[f64],
    max_iters: usize,
    tol: f64,
) -> FwOutcome {
    debug_assert_eq!(grads.len(), n * d);
    debug_assert_eq!(init.len(), n);
    let mut probs = init.to_vec();
    let mut m = weighted_outer(grads, n, d, &probs);
    let mut best_probs = probs.clone();
    let mut best_obj = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    let mut iters = 0;
    let mut converged = false;
    // Fan steps cost an LP over all arms; budget them so crawling instances
    // stay fast. Pure crawls (tiny vertex gains with no fan help) get their
    // own allowance before the solve settles for the best iterate.
    let mut fan_budget = (max_iters / 16).clamp(8, 128);
    let mut crawl_budget = 256usize;

    while iters < max_iters {
        iters += 1;
        let pairs = eigen_sym(&m);
        let (lambda, v) = pairs.min_pair();
        if lambda > best_obj {
            best_obj = lambda;
            best_probs.copy_from_slice(&probs);
        }
        // Subgradient scores and Frank-Wolfe vertex.
        let mut best_i = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..n {
            let gi = &grads[i * d..(i + 1) * d];
            let dot: f64 = gi.iter().zip(v).map(|(a, b)| a * b).sum();
            let score = dot * dot;
            if score > best_score {
                best_score = score;
                best_i = i;
            }
        }
        gap = best_score - lambda;
        if gap <= tol {
            converged = true;
            break;
        }
        let floor = 1e-12 * (1.0 + lambda.abs());
        let g = &grads[best_i * d..(best_i + 1) * d];
        let (v_gamma, v_lambda) = line_search(&m, g);
        let v_gain = v_lambda - lambda;
        if v_gain >= (1e-3 * gap).max(floor) {
            // Healthy vertex step.
            for (i, p) in probs.iter_mut().enumerate() {
                *p *= 1.0 - v_gamma;
                if i == best_i {
                    *p += v_gamma;
                }
            }
            m.scale(1.0 - v_gamma);
            m.add_outer(g, v_gamma);
            continue;
        }
        // The vertex direction crawls (or stalls outright): near-tied
        // eigenvalues re-order under any useful step. Fan over the coupled
        // eigenspace and step toward a mixture instead.
        let fan = if fan_budget > 0 {
            fan_budget -= 1;
            fan_step(&pairs, lambda, gap, grads, n, d, &m)
        } else {
            None
        };
        match fan {
            Some((mixture, f_gamma, f_lambda)) if f_lambda - lambda > v_gain.max(floor) => {
                let mut m_s = SymMatrix::zeros(d);
                for (i, &s) in mixture.iter().enumerate() {
                    if s > 0.0 {
                        m_s.add_outer(&grads[i * d..(i + 1) * d], s);
                    }
                }
                for (p, &s) in probs.iter_mut().zip(&mixture) {
                    *p = (1.0 - f_gamma) * *p + f_gamma * s;
                }
                m.scale(1.0 - f_gamma);
                for (idx, v) in m.data.iter_mut().enumerate() {
                    *v += f_gamma * m_s.data[idx];
                }
            }
            _ if v_gain > floor && crawl_budget > 0 => {
                // Crawl on: the vertex step is still the best available.
                crawl_budget -= 1;
                for (i, p) in probs.iter_mut().enumerate() {
                    *p *= 1.0 - v_gamma;
                    if i == best_i {
                        *p += v_gamma;
                    }
                }
                m.scale(1.0 - v_gamma);
                m.add_outer(g, v_gamma);
            }
            _ => break,
        }
    }

    // Final bookkeeping on the best iterate seen.
    let m_best = weighted_outer(grads, n, d, &best_probs);
    let objective = eigen_sym(&m_best).min_pair().0;
    debug_assert!(objective >= best_obj - 1e-12);
    FwOutcome {
        probs: best_probs,
        objective,
        gap,
        iters,
        converged,
    }
}
