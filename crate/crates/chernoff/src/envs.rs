//! Builders for the benchmark environments and CSV dataset ingestion.
//!
//! All builders are pure functions of their seed: identical seeds give
//! bit-identical environments.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{MeansTable, NoiseSpec, TestEnv};
use crate::regression::{ParamModel, RegressionEnv};
use crate::rng::{derive_stream, Stream};
use crate::{Error, Result};

/// Two arms, three hypotheses; arm 1 separates everything, arm 2 almost
/// nothing. The canonical case where the exploration cost dominates and the
/// uniform baseline beats plain Chernoff sampling at moderate confidence.
pub fn build_example1() -> TestEnv {
    let means = MeansTable::from_rows(&[vec![1.0, 0.001, 0.0], vec![1.0, 1.002, 0.998]])
        .expect("static table is valid");
    TestEnv::new(means, NoiseSpec::gaussian_default(), 0).expect("valid env")
}

/// Distinct seeded perturbations in `(lo, hi)`, rejection-sampled so no two
/// values collide.
fn distinct_perturbations(count: usize, lo: f64, hi: f64, rng: &mut Stream) -> Vec<f64> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: f64 = rng.gen_range(lo..hi);
        if v > lo && seen.insert(v.to_bits()) {
            out.push(v);
        }
    }
    out
}

/// Fifty arms, six hypotheses, three groups: one arm separating the truth
/// from everything (mean 3 vs 0), five arms each separating one hypothesis
/// (3 on its own column, 2 elsewhere), and forty-four barely informative arms
/// at `1 + iota` with distinct seeded `iota` in (0, 0.01).
///
/// Arm 1 is constant across the alternatives, so `eta0 = 0` here by
/// construction; the sub-Gaussian stopping rule is unavailable on this
/// environment and `D1 = 0` is reported by diagnostics.
pub fn build_three_group(seed: u64) -> TestEnv {
    let mut rng = derive_stream(seed, "three_group", 0);
    let j = 6;
    let mut rows = Vec::with_capacity(50);
    rows.push(vec![3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    for arm in 1..6 {
        let mut row = vec![2.0; j];
        row[arm] = 3.0;
        rows.push(row);
    }
    let iotas = distinct_perturbations(44 * j, 0.0, 0.01, &mut rng);
    for block in iotas.chunks(j) {
        rows.push(block.iter().map(|&e| 1.0 + e).collect());
    }
    let means = MeansTable::from_rows(&rows).expect("valid table");
    TestEnv::new(means, NoiseSpec::gaussian_default(), 0).expect("valid env")
}

/// The minimax family: arm 1 carries all discrimination power with means
/// `Gamma * (1, 1 - 1/J, ..., 1 - (J-1)/J)`; the remaining arms hold distinct
/// seeded values below `Gamma / (4J)`.
pub fn build_minimax(j: usize, n: usize, gamma: f64, seed: u64) -> Result<TestEnv> {
    if gamma <= 0.0 {
        return Err(Error::InvalidEnv(format!("gamma must be positive, got {gamma}")));
    }
    if j < 2 || n < 1 {
        return Err(Error::InvalidEnv("need J >= 2 and n >= 1".into()));
    }
    let mut rng = derive_stream(seed, "minimax", 0);
    let mut rows = Vec::with_capacity(n);
    rows.push((0..j).map(|k| gamma * (1.0 - k as f64 / j as f64)).collect());
    if n > 1 {
        let eps = distinct_perturbations((n - 1) * j, 0.0, gamma / (4.0 * j as f64), &mut rng);
        for block in eps.chunks(j) {
            rows.push(block.to_vec());
        }
    }
    let means = MeansTable::from_rows(&rows)?;
    debug_assert!(means.eta0() > 0.0);
    // Bounded range Gamma = sqrt(eta)/2 -> eta = 4 Gamma^2; Gaussian noise is
    // still the default observation model, so eta is the diagnostics proxy.
    TestEnv::new(means, NoiseSpec::gaussian_default(), 0)
}

/// Logistic model on fifty planar actions: the optimal action `(1, 0)`, the
/// informative orthogonal action `(0, 1)`, and forty-eight near-diagonal
/// actions `(0.71 +- iota, 0.71 -+ iota)` with distinct seeded `iota` in
/// (0, 0.05). Ground truth `theta* = (1, 0)` on the unit sphere.
pub fn build_logistic_groups(seed: u64) -> (ParamModel, RegressionEnv) {
    let mut rng = derive_stream(seed, "logistic_groups", 0);
    let mut features = Vec::with_capacity(50);
    features.push(vec![1.0, 0.0]);
    features.push(vec![0.0, 1.0]);
    let iotas = distinct_perturbations(48, 0.0, 0.05, &mut rng);
    for (k, &iota) in iotas.iter().enumerate() {
        if k % 2 == 0 {
            features.push(vec![0.71 + iota, 0.71 - iota]);
        } else {
            features.push(vec![0.71 - iota, 0.71 + iota]);
        }
    }
    let model = ParamModel::logistic(features).expect("valid features");
    let env = RegressionEnv {
        theta_star: vec![1.0, 0.0],
        noise: NoiseSpec::gaussian_default(),
    };
    (model, env)
}

/// Two-unit ReLU network over a seeded non-uniform planar point cloud (a
/// mixture of two Gaussian clusters). Output weights are signs in {-1, +1};
/// the builder rejects ground truths that leave either unit dead on the whole
/// cloud.
pub fn build_relu_net(seed: u64, n_points: usize) -> Result<(ParamModel, RegressionEnv)> {
    if n_points < 10 {
        return Err(Error::InvalidEnv(format!(
            "need at least 10 points, got {n_points}"
        )));
    }
    let mut rng = derive_stream(seed, "relu_net", 0);
    let mut features: Vec<Vec<f64>> = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let (cx, cy, s) = if rng.gen::<f64>() < 0.6 {
            (-0.8, -0.4, 0.5)
        } else {
            (1.1, 0.7, 0.4)
        };
        let x = cx + s * crate::env::standard_normal(&mut rng);
        let y = cy + s * crate::env::standard_normal(&mut rng);
        features.push(vec![x, y]);
    }

    // Ground truth: unit-ish hidden weights, small biases, sign outputs.
    // Reject configurations that leave a unit inactive everywhere.
    for _ in 0..64 {
        let mut theta = vec![0.0; 8];
        for slot in theta.iter_mut().take(6) {
            *slot = crate::env::standard_normal(&mut rng);
        }
        theta[2] *= 0.5;
        theta[5] *= 0.5;
        theta[6] = if rng.gen::<f64>() < 0.5 { 1.0 } else { -1.0 };
        theta[7] = if rng.gen::<f64>() < 0.5 { 1.0 } else { -1.0 };
        let mut active1 = 0usize;
        let mut active2 = 0usize;
        for x in &features {
            if theta[0] * x[0] + theta[1] * x[1] + theta[2] > 0.0 {
                active1 += 1;
            }
            if theta[3] * x[0] + theta[4] * x[1] + theta[5] > 0.0 {
                active2 += 1;
            }
        }
        let quarter = n_points / 4;
        if active1 >= quarter && active2 >= quarter && active1 <= n_points - quarter / 2 {
            let model = ParamModel::relu_net(features)?;
            let env = RegressionEnv {
                theta_star: theta,
                noise: NoiseSpec::gaussian_default(),
            };
            return Ok((model, env));
        }
    }
    Err(Error::InvalidEnv(
        "could not draw an active ground-truth network".into(),
    ))
}

/// How to turn a CSV file into a linear regression environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: String,
    /// Target column, by header name or zero-based index.
    pub target_column: ColumnRef,
    /// Feature columns; empty means every non-target numeric column.
    #[serde(default)]
    pub feature_columns: Vec<ColumnRef>,
    #[serde(default)]
    pub normalize: Normalize,
    /// Observation noise applied on top of the fitted linear model.
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
}

fn default_noise_std() -> f64 {
    0.5f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalize {
    #[default]
    None,
    Standardize,
}

/// Result of an ingestion: the linear model over dataset rows as actions,
/// the OLS ground truth, and bookkeeping.
#[derive(Debug, Clone)]
pub struct IngestedDataset {
    pub model: ParamModel,
    pub env: RegressionEnv,
    pub rows_dropped: usize,
    pub feature_names: Vec<String>,
}

fn resolve_column(headers: &[String], col: &ColumnRef) -> Result<usize> {
    match col {
        ColumnRef::Index(i) => {
            if *i < headers.len() {
                Ok(*i)
            } else {
                Err(Error::Dataset(format!(
                    "column index {i} out of range ({} columns)",
                    headers.len()
                )))
            }
        }
        ColumnRef::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Dataset(format!("no column named '{name}'"))),
    }
}

fn parse_cell(raw: &str) -> Result<Option<f64>> {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return Ok(None); // missing; the row is dropped
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Dataset(format!("non-numeric cell '{s}'")))
}

/// Reads a comma-separated, header-first CSV; rows become action features of
/// a linear model and the ground truth is the ordinary-least-squares fit of
/// the target on the features. Rows with missing cells in the selected
/// columns are dropped and counted.
pub fn ingest_csv(spec: &DatasetSpec) -> Result<IngestedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(Path::new(&spec.path))?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let target = resolve_column(&headers, &spec.target_column)?;
    let feature_idx: Vec<usize> = if spec.feature_columns.is_empty() {
        (0..headers.len()).filter(|&i| i != target).collect()
    } else {
        let mut idx = Vec::with_capacity(spec.feature_columns.len());
        for c in &spec.feature_columns {
            let i = resolve_column(&headers, c)?;
            if i == target {
                return Err(Error::Dataset("target column listed as a feature".into()));
            }
            idx.push(i);
        }
        idx
    };
    if feature_idx.is_empty() {
        return Err(Error::Dataset("no feature columns selected".into()));
    }

    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let mut row = Vec::with_capacity(feature_idx.len());
        let mut missing = false;
        for &i in &feature_idx {
            match parse_cell(record.get(i).unwrap_or(""))? {
                Some(v) => row.push(v),
                None => {
                    missing = true;
                    break;
                }
            }
        }
        let y = if missing {
            None
        } else {
            parse_cell(record.get(target).unwrap_or(""))?
        };
        match y {
            Some(y) => {
                features.push(row);
                targets.push(y);
            }
            None => dropped += 1,
        }
    }

    let d = feature_idx.len();
    if features.len() < d {
        return Err(Error::Dataset(format!(
            "only {} usable rows for {d} features",
            features.len()
        )));
    }

    if spec.normalize == Normalize::Standardize {
        for col in 0..d {
            let n = features.len() as f64;
            let mean: f64 = features.iter().map(|r| r[col]).sum::<f64>() / n;
            let var: f64 = features.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt().max(1e-12);
            for row in &mut features {
                row[col] = (row[col] - mean) / sd;
            }
        }
    }

    // Ordinary least squares on the full dataset.
    let theta_star = ols_fit(&features, &targets, d)?;
    let model = ParamModel::linear(features)?;
    let env = RegressionEnv {
        theta_star,
        noise: NoiseSpec::gaussian(spec.noise_std)?,
    };
    Ok(IngestedDataset {
        model,
        env,
        rows_dropped: dropped,
        feature_names: feature_idx.iter().map(|&i| headers[i].clone()).collect(),
    })
}

fn ols_fit(features: &[Vec<f64>], targets: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut xtx = vec![0.0; d * d];
    let mut xty = vec![0.0; d];
    for (row, &y) in features.iter().zip(targets) {
        for i in 0..d {
            xty[i] += row[i] * y;
            for jj in 0..d {
                xtx[i * d + jj] += row[i] * row[jj];
            }
        }
    }
    // Gaussian elimination with partial pivoting; tiny ridge on singular data.
    for attempt in 0..6 {
        let ridge = if attempt == 0 { 0.0 } else { 10f64.powi(attempt - 11) };
        let mut a = xtx.clone();
        for i in 0..d {
            a[i * d + i] += ridge;
        }
        if let Some(theta) = gauss_solve(&mut a, d, &xty) {
            return Ok(theta);
        }
    }
    Err(Error::Dataset("singular normal equations".into()))
}

fn gauss_solve(a: &mut [f64], d: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    let mut b = rhs.to_vec();
    for c in 0..d {
        let mut piv = c;
        for r in (c + 1)..d {
            if a[r * d + c].abs() > a[piv * d + c].abs() {
                piv = r;
            }
        }
        if a[piv * d + c].abs() < 1e-12 {
            return None;
        }
        if piv != c {
            for j in 0..d {
                a.swap(c * d + j, piv * d + j);
            }
            b.swap(c, piv);
        }
        for r in (c + 1)..d {
            let f = a[r * d + c] / a[c * d + c];
            if f != 0.0 {
                for j in c..d {
                    a[r * d + j] -= f * a[c * d + j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let mut sum = b[r];
        for j in (r + 1)..d {
            sum -= a[r * d + j] * x[j];
        }
        x[r] = sum / a[r * d + r];
    }
    Some(x)
}

/// Writes a model's features (and a target column from the ground truth) back
/// to CSV; round-trips through [`ingest_csv`].
pub fn write_features_csv(
    path: &Path,
    model: &ParamModel,
    env: &RegressionEnv,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let d = model.feature(0).len();
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.push("target".to_string());
    writer.write_record(&header)?;
    for arm in 0..model.arm_count() {
        let mut record: Vec<String> = model.feature(arm).iter().map(|v| format!("{v:.17e}")).collect();
        record.push(format!("{:.17e}", model.mean(arm, &env.theta_star)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
