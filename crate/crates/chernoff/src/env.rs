//! Finite testing environments: the arm-by-hypothesis means table, the
//! observation noise model, and reward generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::Stream;
use crate::{Error, Result};

/// The n x J matrix of arm means, one row per arm, one column per hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeansTable {
    means: Vec<f64>, // row-major, n * j entries
    n: usize,
    j: usize,
}

impl MeansTable {
    /// Builds a table from rows (one per arm). Requires n >= 1, J >= 2 and
    /// finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMeans("need at least one arm".into()));
        }
        let j = rows[0].len();
        if j < 2 {
            return Err(Error::InvalidMeans(format!(
                "need at least two hypotheses, got {j}"
            )));
        }
        let mut means = Vec::with_capacity(n * j);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != j {
                return Err(Error::InvalidMeans(format!(
                    "arm {i} has {} entries, expected {j}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidMeans(format!("non-finite mean on arm {i}")));
                }
                means.push(v);
            }
        }
        Ok(Self { means, n, j })
    }

    pub fn arm_count(&self) -> usize {
        self.n
    }

    pub fn hyp_count(&self) -> usize {
        self.j
    }

    /// mu_i(theta_h).
    #[inline]
    pub fn mean(&self, arm: usize, hyp: usize) -> f64 {
        debug_assert!(arm < self.n && hyp < self.j);
        self.means[arm * self.j + hyp]
    }

    /// Row of means for one arm across all hypotheses.
    #[inline]
    pub fn arm_row(&self, arm: usize) -> &[f64] {
        &self.means[arm * self.j..(arm + 1) * self.j]
    }

    /// Smallest squared mean difference over all arms and hypothesis pairs
    /// (eta_0). Zero when two hypotheses share a mean on some arm.
    pub fn eta0(&self) -> f64 {
        let mut min = f64::INFINITY;
        for arm in 0..self.n {
            let row = self.arm_row(arm);
            for a in 0..self.j {
                for b in (a + 1)..self.j {
                    let g = (row[a] - row[b]) * (row[a] - row[b]);
                    if g < min {
                        min = g;
                    }
                }
            }
        }
        min
    }
}

/// Observation noise attached to every arm.
///
/// `eta` is the sub-Gaussian range parameter: bounded kinds clamp realized
/// rewards into `[-sqrt(eta)/2, sqrt(eta)/2]`. The Gaussian kind is unbounded;
/// its `eta` is a diagnostics-only proxy (default `16 * std^2`) and plays no
/// role in reward generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian { std: f64 },
    BoundedUniform { half_width: f64 },
    TruncatedGaussian { std: f64, half_range: f64 },
}

impl NoiseSpec {
    /// Gaussian noise with the given standard deviation; eta proxy 16 * std^2.
    pub fn gaussian(std: f64) -> Result<Self> {
        if !(std >= 0.0) || !std.is_finite() {
            return Err(Error::InvalidNoise(format!("std must be >= 0, got {std}")));
        }
        Ok(Self {
            kind: NoiseKind::Gaussian { std },
            eta: 16.0 * std * std,
        })
    }

    /// Default observation model: Gaussian with variance 1/2.
    pub fn gaussian_default() -> Self {
        Self::gaussian(0.5f64.sqrt()).expect("valid std")
    }

    /// Uniform noise on [-half_width, half_width]; rewards clamped into the
    /// eta box.
    pub fn bounded_uniform(half_width: f64, eta: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(eta > 0.0) {
            return Err(Error::InvalidNoise(
                "half_width and eta must be positive".into(),
            ));
        }
        Ok(Self {
            kind: NoiseKind::BoundedUniform { half_width },
            eta,
        })
    }

    /// Gaussian noise rejection-sampled into [-half_range, half_range];
    /// rewards clamped into the eta box.
    pub fn truncated_gaussian(std: f64, half_range: f64, eta: f64) -> Result<Self> {
        if !(std > 0.0) || !(half_range > 0.0) || !(eta > 0.0) {
            return Err(Error::InvalidNoise(
                "std, half_range and eta must be positive".into(),
            ));
        }
        Ok(Self {
            kind: NoiseKind::TruncatedGaussian { std, half_range },
            eta,
        })
    }

    /// Whether realized rewards are almost surely inside the eta box.
    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, NoiseKind::Gaussian { .. })
    }

    /// Half-width of the reward range `sqrt(eta)/2`.
    pub fn range_half_width(&self) -> f64 {
        self.eta.sqrt() / 2.0
    }
}

/// A finite testing environment: means table, noise model, and the hypothesis
/// that actually generates observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEnv {
    pub means: MeansTable,
    pub noise: NoiseSpec,
    pub true_hyp: usize,
}

impl TestEnv {
    pub fn new(means: MeansTable, noise: NoiseSpec, true_hyp: usize) -> Result<Self> {
        if true_hyp >= means.hyp_count() {
            return Err(Error::HypOutOfRange {
                hyp: true_hyp,
                j: means.hyp_count(),
            });
        }
        Ok(Self {
            means,
            noise,
            true_hyp,
        })
    }
}

/// Standard normal draw via Box-Muller; two uniform draws per call keeps the
/// stream layout independent of the rand version's Gaussian sampler.
#[inline]
pub(crate) fn standard_normal(rng: &mut Stream) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws one reward for `arm` when `true_hyp` governs the environment:
/// `mu_arm(theta*) + noise`, clamped into the eta box for bounded kinds.
pub fn draw_reward(
    env_means: &MeansTable,
    true_hyp: usize,
    arm: usize,
    noise: &NoiseSpec,
    rng: &mut Stream,
) -> Result<f64> {
    if arm >= env_means.arm_count() {
        return Err(Error::ArmOutOfRange {
            arm,
            n: env_means.arm_count(),
        });
    }
    if true_hyp >= env_means.hyp_count() {
        return Err(Error::HypOutOfRange {
            hyp: true_hyp,
            j: env_means.hyp_count(),
        });
    }
    let mu = env_means.mean(arm, true_hyp);
    let y = match noise.kind {
        NoiseKind::Gaussian { std } => mu + std * standard_normal(rng),
        NoiseKind::BoundedUniform { half_width } => {
            let eps: f64 = rng.gen_range(-half_width..=half_width);
            let b = noise.range_half_width();
            (mu + eps).clamp(-b, b)
        }
        NoiseKind::TruncatedGaussian { std, half_range } => {
            let mut eps = std * standard_normal(rng);
            while eps.abs() > half_range {
                eps = std * standard_normal(rng);
            }
            let b = noise.range_half_width();
            (mu + eps).clamp(-b, b)
        }
    };
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn zero_noise_returns_the_mean() {
        let means = MeansTable::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let noise = NoiseSpec::gaussian(0.0).unwrap();
        let mut rng = stream_from_seed(1);
        let y = draw_reward(&means, 0, 0, &noise, &mut rng).unwrap();
        assert_eq!(y, 1.0);
    }

    #[test]
    fn gaussian_reward_matches_mean_and_variance() {
        // Example-1 table, arm 1 under the true hypothesis has mean 1.0.
        let means =
            MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]]).unwrap();
        let noise = NoiseSpec::gaussian_default();
        let mut rng = stream_from_seed(7);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let y = draw_reward(&means, 0, 0, &noise, &mut rng).unwrap();
            sum += y;
            sumsq += y * y;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let sigma = 0.5f64.sqrt();
        // mean within 3 sigma / sqrt(N)
        assert!(
            (mean - 1.0).abs() < 3.0 * sigma / (n as f64).sqrt(),
            "mean = {mean}"
        );
        assert!((var - 0.5).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn bounded_uniform_respects_range() {
        let means = MeansTable::from_rows(&[vec![0.9, -0.9]]).unwrap();
        let noise = NoiseSpec::bounded_uniform(0.5, 4.0).unwrap();
        let mut rng = stream_from_seed(3);
        for _ in 0..10_000 {
            let y = draw_reward(&means, 0, 0, &noise, &mut rng).unwrap();
            assert!((-1.0..=1.0).contains(&y), "y = {y}");
        }
    }

    #[test]
    fn truncated_gaussian_respects_range() {
        let means = MeansTable::from_rows(&[vec![0.5, -0.5]]).unwrap();
        let noise = NoiseSpec::truncated_gaussian(0.4, 0.5, 4.0).unwrap();
        let mut rng = stream_from_seed(9);
        for _ in 0..10_000 {
            let y = draw_reward(&means, 1, 0, &noise, &mut rng).unwrap();
            assert!((-1.0..=1.0).contains(&y));
            assert!((y - (-0.5)).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn identical_seeds_give_identical_rewards() {
        let means = MeansTable::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let noise = NoiseSpec::gaussian_default();
        let mut r1 = stream_from_seed(11);
        let mut r2 = stream_from_seed(11);
        for arm in [0usize, 1, 0, 1, 1] {
            let a = draw_reward(&means, 0, arm, &noise, &mut r1).unwrap();
            let b = draw_reward(&means, 0, arm, &noise, &mut r2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn out_of_range_indices_error() {
        let means = MeansTable::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let noise = NoiseSpec::gaussian_default();
        let mut rng = stream_from_seed(1);
        assert!(draw_reward(&means, 0, 5, &noise, &mut rng).is_err());
        assert!(draw_reward(&means, 7, 0, &noise, &mut rng).is_err());
    }

    #[test]
    fn means_table_validation() {
        assert!(MeansTable::from_rows(&[]).is_err());
        assert!(MeansTable::from_rows(&[vec![1.0]]).is_err());
        assert!(MeansTable::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(MeansTable::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn eta0_minimum_gap() {
        let means =
            MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]]).unwrap();
        // arm 1 gap between theta' and theta'' is 0.001 -> 1e-6.
        assert!((means.eta0() - 1e-6).abs() < 1e-15);
        let dup = MeansTable::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(dup.eta0(), 0.0);
    }
}
