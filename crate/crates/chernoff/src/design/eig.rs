//! Cyclic Jacobi eigendecomposition for small symmetric matrices.
//!
//! The design solver only ever needs d x d matrices with d up to a few dozen,
//! where Jacobi is simple, deterministic, and accurate to machine precision.

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    pub data: Vec<f64>,
    pub dim: usize,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim * dim],
            dim,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.dim + c] = v;
    }

    /// Adds `w * g g^T`.
    pub fn add_outer(&mut self, g: &[f64], w: f64) {
        debug_assert_eq!(g.len(), self.dim);
        for r in 0..self.dim {
            let gr = w * g[r];
            for c in 0..self.dim {
                self.data[r * self.dim + c] += gr * g[c];
            }
        }
    }

    /// Scales all entries.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim {
            let mut row = 0.0;
            for c in 0..self.dim {
                row += self.get(r, c) * v[c];
            }
            acc += v[r] * row;
        }
        acc
    }
}

/// Eigen pairs of a symmetric matrix; `vectors[k]` is the eigenvector for
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenPairs {
    /// Smallest eigenvalue and its eigenvector (first index on ties, so the
    /// subgradient pick is deterministic).
    pub fn min_pair(&self) -> (f64, &[f64]) {
        let mut k = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[k] {
                k = i;
            }
        }
        (self.values[k], &self.vectors[k])
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi rotations; terminates when the off-diagonal mass falls below
/// `1e-12` relative to the diagonal scale.
pub fn eigen_sym(m: &SymMatrix) -> EigenPairs {
    let n = m.dim;
    let mut a = m.clone();
    // v starts as identity; columns accumulate the rotations.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 1 {
        return EigenPairs {
            values: vec![a.get(0, 0)],
            vectors: vec![vec![1.0]],
        };
    }
    let scale: f64 = (0..n).map(|i| a.get(i, i).abs()).fold(1.0, f64::max);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a.get(p, q).abs();
            }
        }
        if off <= OFF_DIAG_TOL * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= f64::EPSILON * scale * 1e-3 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                a.set(p, p, app - h);
                a.set(q, q, aqq + h);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for j in 0..n {
                    if j != p && j != q {
                        let ajp = a.get(j, p);
                        let ajq = a.get(j, q);
                        let np = ajp - s * (ajq + tau * ajp);
                        let nq = ajq + s * (ajp - tau * ajq);
                        a.set(j, p, np);
                        a.set(p, j, np);
                        a.set(j, q, nq);
                        a.set(q, j, nq);
                    }
                }
                for j in 0..n {
                    let vjp = v[j * n + p];
                    let vjq = v[j * n + q];
                    v[j * n + p] = vjp - s * (vjq + tau * vjp);
                    v[j * n + q] = vjq + s * (vjp - tau * vjq);
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|j| v[j * n + k]).collect())
        .collect();
    EigenPairs { values, vectors }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &SymMatrix) -> f64 {
    eigen_sym(m).min_pair().0
}
