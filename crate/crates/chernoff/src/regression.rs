//! Active regression over smooth parameter spaces: parametric mean models
//! with analytic gradients, damped Gauss-Newton least squares, the
//! min-eigenvalue sampling loop, and the averaged worst-case loss metric.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::{solve_min_eig_design_from, Design, EigInstance, SolveStatus};
use crate::env::{standard_normal, NoiseKind, NoiseSpec};
use crate::rng::Stream;
use crate::{Error, Result};

/// Mean-function family over theta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `mu_i(theta) = x_i . theta`
    Linear,
    /// `mu_i(theta) = 1 / (1 + exp(-x_i . theta))`
    Logistic,
    /// Two-unit ReLU network on planar features:
    /// `mu_i(theta) = c1 relu(w1 . x_i + b1) + c2 relu(w2 . x_i + b2)` with
    /// `theta = (w1, b1, w2, b2, c1, c2)`, `c1, c2 in {-1, +1}`.
    ReluNet,
}

/// A parametric mean model over a fixed pool of action features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamModel {
    kind: ModelKind,
    features: Vec<f64>, // row-major n x fdim
    n: usize,
    fdim: usize,
}

/// Continuous parameter count of the ReLU model (w1, b1, w2, b2).
const RELU_CONT_DIM: usize = 6;
/// Full theta length of the ReLU model (continuous + two output signs).
const RELU_THETA_LEN: usize = 8;

impl ParamModel {
    fn build(kind: ModelKind, features: Vec<Vec<f64>>) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::InvalidModel("need at least one action".into()));
        }
        let fdim = features[0].len();
        if fdim == 0 {
            return Err(Error::InvalidModel("zero-dimensional features".into()));
        }
        if kind == ModelKind::ReluNet && fdim != 2 {
            return Err(Error::InvalidModel(format!(
                "relu_net expects planar features, got dimension {fdim}"
            )));
        }
        let mut flat = Vec::with_capacity(n * fdim);
        for (i, row) in features.iter().enumerate() {
            if row.len() != fdim {
                return Err(Error::InvalidModel(format!("ragged feature row {i}")));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidModel(format!("non-finite feature row {i}")));
                }
                flat.push(v);
            }
        }
        Ok(Self {
            kind,
            features: flat,
            n,
            fdim,
        })
    }

    pub fn linear(features: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(ModelKind::Linear, features)
    }

    pub fn logistic(features: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(ModelKind::Logistic, features)
    }

    pub fn relu_net(features: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(ModelKind::ReluNet, features)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn arm_count(&self) -> usize {
        self.n
    }

    pub fn feature(&self, arm: usize) -> &[f64] {
        &self.features[arm * self.fdim..(arm + 1) * self.fdim]
    }

    /// Dimension of the continuous parameter block (what gradients and the
    /// eigenvalue design live in).
    pub fn grad_dim(&self) -> usize {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => self.fdim,
            ModelKind::ReluNet => RELU_CONT_DIM,
        }
    }

    /// Full theta length; the ReLU model carries two extra sign slots.
    pub fn theta_len(&self) -> usize {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => self.fdim,
            ModelKind::ReluNet => RELU_THETA_LEN,
        }
    }

    pub fn mean(&self, arm: usize, theta: &[f64]) -> f64 {
        let x = self.feature(arm);
        match self.kind {
            ModelKind::Linear => dot(x, &theta[..self.fdim]),
            ModelKind::Logistic => sigmoid(dot(x, &theta[..self.fdim])),
            ModelKind::ReluNet => {
                let z1 = theta[0] * x[0] + theta[1] * x[1] + theta[2];
                let z2 = theta[3] * x[0] + theta[4] * x[1] + theta[5];
                theta[6] * z1.max(0.0) + theta[7] * z2.max(0.0)
            }
        }
    }

    /// Analytic gradient with respect to the continuous parameters, written
    /// into `out` (length [`grad_dim`](Self::grad_dim)). The ReLU subgradient
    /// at a kink is taken as zero.
    pub fn grad(&self, arm: usize, theta: &[f64], out: &mut [f64]) {
        let x = self.feature(arm);
        match self.kind {
            ModelKind::Linear => out.copy_from_slice(x),
            ModelKind::Logistic => {
                let mu = sigmoid(dot(x, &theta[..self.fdim]));
                let w = mu * (1.0 - mu);
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = w * xi;
                }
            }
            ModelKind::ReluNet => {
                let z1 = theta[0] * x[0] + theta[1] * x[1] + theta[2];
                let z2 = theta[3] * x[0] + theta[4] * x[1] + theta[5];
                let a1 = if z1 > 0.0 { theta[6] } else { 0.0 };
                let a2 = if z2 > 0.0 { theta[7] } else { 0.0 };
                out[0] = a1 * x[0];
                out[1] = a1 * x[1];
                out[2] = a1;
                out[3] = a2 * x[0];
                out[4] = a2 * x[1];
                out[5] = a2;
            }
        }
    }

    /// Gradients at `theta` for every arm, as an eigenvalue-design instance.
    pub fn eig_instance(&self, theta: &[f64]) -> Result<EigInstance> {
        let d = self.grad_dim();
        let mut g = vec![0.0; d];
        let mut rows = Vec::with_capacity(self.n);
        for arm in 0..self.n {
            self.grad(arm, theta, &mut g);
            rows.push(g.clone());
        }
        EigInstance::new(rows)
    }

    /// Default initial estimate: the zero vector for linear and logistic
    /// models; small seeded normal weights with positive output signs for the
    /// ReLU model.
    pub fn initial_theta(&self, rng: &mut Stream) -> Vec<f64> {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => vec![0.0; self.fdim],
            ModelKind::ReluNet => {
                let mut theta = vec![0.0; RELU_THETA_LEN];
                for slot in theta.iter_mut().take(RELU_CONT_DIM) {
                    *slot = 0.1 * standard_normal(rng);
                }
                theta[6] = 1.0;
                theta[7] = 1.0;
                theta
            }
        }
    }

    /// Distance between two parameter vectors, canonicalizing the ReLU
    /// model's unit permutation (swapping the two hidden units leaves the
    /// function unchanged).
    pub fn theta_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => l2_distance(a, b),
            ModelKind::ReluNet => {
                let ca = canonical_relu(a);
                let cb = canonical_relu(b);
                l2_distance(&ca, &cb)
            }
        }
    }
}

fn canonical_relu(theta: &[f64]) -> Vec<f64> {
    let u1 = [theta[0], theta[1], theta[2], theta[6]];
    let u2 = [theta[3], theta[4], theta[5], theta[7]];
    let key = |u: &[f64; 4]| (u[3], u[0], u[1], u[2]);
    let (first, second) = if key(&u1) <= key(&u2) { (u1, u2) } else { (u2, u1) };
    vec![
        first[0], first[1], first[2], second[0], second[1], second[2], first[3], second[3],
    ]
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solves `(H + lambda I) x = rhs` by Cholesky, bumping the damping if the
/// factorization hits a non-positive pivot. Returns `None` if it never
/// succeeds.
fn solve_damped(h: &[f64], d: usize, rhs: &[f64], mut lambda: f64) -> Option<Vec<f64>> {
    for _ in 0..40 {
        let mut a = h.to_vec();
        for i in 0..d {
            a[i * d + i] += lambda;
        }
        if let Some(x) = cholesky_solve(&mut a, d, rhs) {
            return Some(x);
        }
        lambda = (lambda * 10.0).max(1e-12);
    }
    None
}

fn cholesky_solve(a: &mut [f64], d: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    // In-place lower Cholesky.
    for c in 0..d {
        for r in c..d {
            let mut sum = a[r * d + c];
            for k in 0..c {
                sum -= a[r * d + k] * a[c * d + k];
            }
            if r == c {
                if sum <= 0.0 {
                    return None;
                }
                a[c * d + c] = sum.sqrt();
            } else {
                a[r * d + c] = sum / a[c * d + c];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0; d];
    for r in 0..d {
        let mut sum = rhs[r];
        for k in 0..r {
            sum -= a[r * d + k] * y[k];
        }
        y[r] = sum / a[r * d + r];
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let mut sum = y[r];
        for k in (r + 1)..d {
            sum -= a[k * d + r] * x[k];
        }
        x[r] = sum / a[r * d + r];
    }
    Some(x)
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// Set when fifty consecutive damped steps failed to reduce the loss; the
    /// best iterate is returned.
    pub diverged: bool,
}

const FIT_MAX_ITERS: usize = 100;
const FIT_MAX_REJECTS: usize = 50;

/// Minimizes `sum_s (obs_s - mu_{arm_s}(theta))^2` by damped Gauss-Newton
/// (Levenberg-style: damping shrinks on accepted steps, grows tenfold on
/// rejected ones), warm-started from `init`.
///
/// The ReLU model solves four least-squares problems, one per output-sign
/// pattern, warm-starting each from `init`'s continuous block, and returns
/// the best.
pub fn fit_least_squares(
    model: &ParamModel,
    arms: &[usize],
    obs: &[f64],
    init: &[f64],
) -> Result<FitOutcome> {
    if arms.is_empty() || arms.len() != obs.len() {
        return Err(Error::NoObservations);
    }
    if init.len() != model.theta_len() {
        return Err(Error::InvalidModel(format!(
            "init has length {}, expected {}",
            init.len(),
            model.theta_len()
        )));
    }
    match model.kind {
        ModelKind::Linear | ModelKind::Logistic => gauss_newton(model, arms, obs, init.to_vec()),
        ModelKind::ReluNet => {
            let mut best: Option<FitOutcome> = None;
            for (c1, c2) in RELU_PATTERNS {
                let mut start = init.to_vec();
                start[6] = c1;
                start[7] = c2;
                let fit = gauss_newton(model, arms, obs, start)?;
                if best.as_ref().map_or(true, |b| fit.loss < b.loss) {
                    best = Some(fit);
                }
            }
            Ok(best.expect("four sign patterns evaluated"))
        }
    }
}

fn loss_of(model: &ParamModel, arms: &[usize], obs: &[f64], theta: &[f64]) -> f64 {
    arms.iter()
        .zip(obs)
        .map(|(&a, &y)| {
            let r = y - model.mean(a, theta);
            r * r
        })
        .sum()
}

fn gauss_newton(
    model: &ParamModel,
    arms: &[usize],
    obs: &[f64],
    mut theta: Vec<f64>,
) -> Result<FitOutcome> {
    let d = model.grad_dim();
    let mut g = vec![0.0; d];
    let mut h = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut lambda = 1e-3;
    let mut loss = loss_of(model, arms, obs, &theta);
    let mut rejects = 0usize;
    let mut grad_norm = f64::INFINITY;

    for _ in 0..FIT_MAX_ITERS {
        h.iter_mut().for_each(|v| *v = 0.0);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for (&a, &y) in arms.iter().zip(obs) {
            let r = y - model.mean(a, &theta);
            model.grad(a, &theta, &mut g);
            for i in 0..d {
                rhs[i] += g[i] * r;
                let gi = g[i];
                for j in 0..d {
                    h[i * d + j] += gi * g[j];
                }
            }
        }
        // grad L = -2 * rhs.
        grad_norm = 2.0 * rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= 1e-8 * (1.0 + loss.abs()) {
            return Ok(FitOutcome {
                theta,
                loss,
                grad_norm,
                converged: true,
                diverged: false,
            });
        }
        let Some(step) = solve_damped(&h, d, &rhs, lambda) else {
            break;
        };
        let mut trial = theta.clone();
        for (t, s) in trial.iter_mut().zip(&step) {
            *t += s;
        }
        let trial_loss = loss_of(model, arms, obs, &trial);
        if trial_loss <= loss + 1e-12 * (1.0 + loss) {
            theta[..].copy_from_slice(&trial);
            loss = trial_loss;
            lambda = (lambda * 0.1).max(1e-12);
            rejects = 0;
        } else {
            lambda *= 10.0;
            rejects += 1;
            if rejects >= FIT_MAX_REJECTS {
                return Ok(FitOutcome {
                    theta,
                    loss,
                    grad_norm,
                    converged: false,
                    diverged: true,
                });
            }
            if lambda > 1e10 {
                // Steps at this damping are numerically zero; the iterate is
                // as stationary as it will get.
                break;
            }
        }
    }
    Ok(FitOutcome {
        theta,
        loss,
        grad_norm,
        converged: grad_norm <= 1e-6 * (1.0 + loss.abs()),
        diverged: false,
    })
}

/// Zero-mean noise draw for regression observations.
pub(crate) fn sample_noise(noise: &NoiseSpec, rng: &mut Stream) -> f64 {
    match noise.kind {
        NoiseKind::Gaussian { std } => std * standard_normal(rng),
        NoiseKind::BoundedUniform { half_width } => rng.gen_range(-half_width..=half_width),
        NoiseKind::TruncatedGaussian { std, half_range } => {
            let mut eps = std * standard_normal(rng);
            while eps.abs() > half_range {
                eps = std * standard_normal(rng);
            }
            eps
        }
    }
}

/// Ground truth for a simulated regression run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEnv {
    pub theta_star: Vec<f64>,
    pub noise: NoiseSpec,
}

/// Sampling rule for the regression loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionPolicy {
    /// Sample from the min-eigenvalue design at the current estimate.
    Cs,
    /// Follow `cs` with probability `1 - 1/sqrt(t)`, explore otherwise.
    EpsCs,
    Uniform,
}

impl RegressionPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            RegressionPolicy::Cs => "cs",
            RegressionPolicy::EpsCs => "eps_cs",
            RegressionPolicy::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "cs" => Ok(RegressionPolicy::Cs),
            "eps_cs" => Ok(RegressionPolicy::EpsCs),
            "uniform" => Ok(RegressionPolicy::Uniform),
            other => Err(Error::Config(format!("unknown regression policy '{other}'"))),
        }
    }
}

/// Mutable state of one regression run.
#[derive(Debug, Clone)]
pub struct RegressionState {
    pub theta_hat: Vec<f64>,
    pub arms: Vec<usize>,
    pub obs: Vec<f64>,
    /// Realized sampling distribution per round; index s holds the design
    /// the arm at round s+1 was drawn from.
    pub design_trace: Vec<Design>,
    /// Rounds where the gradient set failed to span and the design was mixed
    /// 50/50 with uniform.
    pub non_spanning_rounds: u64,
    /// Fits that hit the divergence guard.
    pub fit_warnings: u64,
    /// Warm start for the next design solve.
    last_design: Option<Vec<f64>>,
    /// Per-sign-pattern warm starts for the ReLU solves.
    relu_warm: Option<Vec<Vec<f64>>>,
}

impl RegressionState {
    pub fn new(model: &ParamModel, rng: &mut Stream) -> Self {
        Self {
            theta_hat: model.initial_theta(rng),
            arms: Vec::new(),
            obs: Vec::new(),
            design_trace: Vec::new(),
            non_spanning_rounds: 0,
            fit_warnings: 0,
            last_design: None,
            relu_warm: None,
        }
    }

    pub fn round(&self) -> usize {
        self.arms.len()
    }
}

/// The four output-sign patterns of the ReLU model.
const RELU_PATTERNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

const DESIGN_MAX_ITERS: usize = 150;
const DESIGN_TOL: f64 = 1e-7;

/// The sampling distribution the Chernoff rule uses at the current estimate:
/// the min-eigenvalue design when the gradients span, otherwise a 50/50 mix
/// of the best-effort design with uniform (flagged via the bool).
fn cs_design(model: &ParamModel, state: &mut RegressionState) -> Result<(Design, bool)> {
    let inst = model.eig_instance(&state.theta_hat)?;
    let n = model.arm_count();
    let warm = state
        .last_design
        .take()
        .unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let sol = solve_min_eig_design_from(&inst, &warm, DESIGN_MAX_ITERS, DESIGN_TOL)?;
    state.last_design = Some(sol.design.probs.clone());
    if sol.status == SolveStatus::NonSpanning {
        Ok((sol.design.mix_uniform(0.5), true))
    } else {
        Ok((sol.design, false))
    }
}

/// One Chernoff regression round: design at the current estimate, sample,
/// observe, refit.
pub fn regression_step(
    state: &mut RegressionState,
    model: &ParamModel,
    env: &RegressionEnv,
    rng: &mut Stream,
) -> Result<()> {
    let (design, non_spanning) = cs_design(model, state)?;
    if non_spanning {
        state.non_spanning_rounds += 1;
    }
    observe_and_refit(state, model, env, design, rng)
}

fn observe_and_refit(
    state: &mut RegressionState,
    model: &ParamModel,
    env: &RegressionEnv,
    design: Design,
    rng: &mut Stream,
) -> Result<()> {
    let arm = design.sample(rng);
    let y = model.mean(arm, &env.theta_star) + sample_noise(&env.noise, rng);
    state.arms.push(arm);
    state.obs.push(y);
    state.design_trace.push(design);
    let fit = refit(state, model, rng)?;
    if fit.diverged {
        state.fit_warnings += 1;
    }
    state.theta_hat = fit.theta;
    Ok(())
}

/// Refits the estimate on the accumulated history.
///
/// Linear and logistic models run two starts — the previous estimate and the
/// default initializer — and keep the lower loss; the fresh start matters for
/// saturating models, where an estimate pushed into a flat tail by early
/// noise has near-zero gradients and a warm start alone would never leave it.
///
/// The ReLU model keeps one warm start per output-sign pattern across rounds
/// (each pattern's solve is then incremental in the history) and re-seeds
/// them from a random start on a cadence, always keeping per-pattern best
/// losses.
fn refit(
    state: &mut RegressionState,
    model: &ParamModel,
    rng: &mut Stream,
) -> Result<FitOutcome> {
    let arms = &state.arms;
    let obs = &state.obs;
    match model.kind() {
        ModelKind::Linear | ModelKind::Logistic => {
            let warm = fit_least_squares(model, arms, obs, &state.theta_hat)?;
            let fresh = fit_least_squares(model, arms, obs, &model.initial_theta(rng))?;
            Ok(if fresh.loss < warm.loss { fresh } else { warm })
        }
        ModelKind::ReluNet => {
            let warm_starts = state.relu_warm.get_or_insert_with(|| {
                RELU_PATTERNS
                    .iter()
                    .map(|&(c1, c2)| {
                        let mut th = state.theta_hat.clone();
                        th[6] = c1;
                        th[7] = c2;
                        th
                    })
                    .collect()
            });
            let t = arms.len();
            let fresh_due = t <= 64 || t % 16 == 0;
            let fresh_init = fresh_due.then(|| model.initial_theta(rng));
            let mut best: Option<FitOutcome> = None;
            for (k, &(c1, c2)) in RELU_PATTERNS.iter().enumerate() {
                let mut start = warm_starts[k].clone();
                start[6] = c1;
                start[7] = c2;
                let mut fit = gauss_newton(model, arms, obs, start)?;
                if let Some(init) = &fresh_init {
                    let mut start = init.clone();
                    start[6] = c1;
                    start[7] = c2;
                    let fresh = gauss_newton(model, arms, obs, start)?;
                    if fresh.loss < fit.loss {
                        fit = fresh;
                    }
                }
                warm_starts[k] = fit.theta.clone();
                if best.as_ref().map_or(true, |b| fit.loss < b.loss) {
                    best = Some(fit);
                }
            }
            Ok(best.expect("four sign patterns evaluated"))
        }
    }
}

/// Averaged worst-case loss gap along a design trace:
/// `(1/t) sum_s sum_i p_s(i) (mu_i(theta) - mu_i(theta_star))^2`. The noise
/// constant cancels in the difference; every summand is a square, so the
/// result is nonnegative for any theta.
pub fn compute_pt_gap(
    design_trace: &[Design],
    model: &ParamModel,
    theta: &[f64],
    theta_star: &[f64],
) -> Result<f64> {
    if design_trace.is_empty() {
        return Err(Error::NoObservations);
    }
    let n = model.arm_count();
    let t = design_trace.len() as f64;
    let mut avg = vec![0.0; n];
    for d in design_trace {
        if d.probs.len() != n {
            return Err(Error::InvalidDesign("trace design has wrong arity".into()));
        }
        for (a, &p) in avg.iter_mut().zip(&d.probs) {
            *a += p;
        }
    }
    let mut total = 0.0;
    for arm in 0..n {
        if avg[arm] > 0.0 {
            let g = model.mean(arm, theta) - model.mean(arm, theta_star);
            total += avg[arm] * g * g;
        }
    }
    Ok(total / t)
}

/// Curves recorded along one regression run at a logarithmic checkpoint
/// schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub checkpoints: Vec<u64>,
    /// `||theta_hat(t) - theta_star||` per checkpoint (unit-permutation
    /// canonical for the ReLU model).
    pub est_err: Vec<f64>,
    /// `P_t(theta_hat(t)) - P_t(theta_star)` per checkpoint, on the realized
    /// design trace.
    pub pt_gap: Vec<f64>,
    /// Support size of the round's realized design per checkpoint.
    pub support_sizes: Vec<usize>,
    pub non_spanning_rounds: u64,
    pub fit_warnings: u64,
}

/// Doubling schedule `1, 2, 4, ...` closed at the horizon.
pub fn log_checkpoints(horizon: usize) -> Vec<u64> {
    let mut points = Vec::new();
    let mut t = 1u64;
    while (t as usize) < horizon {
        points.push(t);
        t *= 2;
    }
    points.push(horizon as u64);
    points.dedup();
    points
}

/// Runs `horizon` rounds of the chosen sampling rule, recording estimation
/// error, the averaged worst-case loss gap, and design support sizes at
/// logarithmic checkpoints. Flags propagate; the run never aborts midway.
pub fn run_regression(
    model: &ParamModel,
    env: &RegressionEnv,
    policy: RegressionPolicy,
    horizon: usize,
    rng: &mut Stream,
) -> Result<RegressionMetrics> {
    let d = model.grad_dim();
    if horizon < d {
        return Err(Error::Config(format!(
            "horizon {horizon} below parameter dimension {d}"
        )));
    }
    if env.theta_star.len() != model.theta_len() {
        return Err(Error::InvalidModel(format!(
            "theta_star has length {}, expected {}",
            env.theta_star.len(),
            model.theta_len()
        )));
    }
    let n = model.arm_count();
    let mut state = RegressionState::new(model, rng);
    let checkpoints = log_checkpoints(horizon);
    let mut metrics = RegressionMetrics {
        checkpoints: checkpoints.clone(),
        est_err: Vec::with_capacity(checkpoints.len()),
        pt_gap: Vec::with_capacity(checkpoints.len()),
        support_sizes: Vec::with_capacity(checkpoints.len()),
        non_spanning_rounds: 0,
        fit_warnings: 0,
    };
    // Running design mass, so checkpoint gap evaluation is O(n).
    let mut design_mass = vec![0.0f64; n];
    let mut next_cp = 0usize;

    for round in 1..=horizon {
        let design = match policy {
            RegressionPolicy::Cs => {
                let (design, non_spanning) = cs_design(model, &mut state)?;
                if non_spanning {
                    state.non_spanning_rounds += 1;
                }
                design
            }
            RegressionPolicy::EpsCs => {
                let eps = 1.0 / (round as f64).sqrt();
                let (design, non_spanning) = cs_design(model, &mut state)?;
                if non_spanning {
                    state.non_spanning_rounds += 1;
                }
                design.mix_uniform(eps)
            }
            RegressionPolicy::Uniform => Design::uniform(n),
        };
        for (m, &p) in design_mass.iter_mut().zip(&design.probs) {
            *m += p;
        }
        let support = design.support_size();
        observe_and_refit(&mut state, model, env, design, rng)?;

        if next_cp < checkpoints.len() && round as u64 == checkpoints[next_cp] {
            metrics
                .est_err
                .push(model.theta_distance(&state.theta_hat, &env.theta_star));
            let mut gap = 0.0;
            for arm in 0..n {
                if design_mass[arm] > 0.0 {
                    let g = model.mean(arm, &state.theta_hat) - model.mean(arm, &env.theta_star);
                    gap += design_mass[arm] * g * g;
                }
            }
            metrics.pt_gap.push(gap / round as f64);
            metrics.support_sizes.push(support);
            next_cp += 1;
        }
    }
    metrics.non_spanning_rounds = state.non_spanning_rounds;
    metrics.fit_warnings = state.fit_warnings;
    Ok(metrics)
}
