//! Dense symmetric matrix support for copula correlation matrices:
//! Cholesky factorization, eigenvalue-clipping PSD repair, inverse and
//! log-determinant.
//!
//! Dimensions in fluid-antenna practice stay in the low hundreds, so the
//! O(K^3) dense routines here are deliberate.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive semidefinite (pivot below -1e-10)")]
    NotPositiveSemidefinite,
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("matrix is not a valid correlation matrix: {0}")]
    InvalidCorrelation(&'static str),
}

/// Pivot threshold below which a Cholesky factorization without repair is
/// rejected; pivots in [-PIVOT_TOL, 0] are clamped to zero.
const PIVOT_TOL: f64 = 1e-10;

/// Default eigenvalue floor for [`psd_repair`].
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-10;

/// Symmetric unit-diagonal matrix of Gaussian-copula dependence parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    /// Row-major K x K storage.
    data: Vec<f64>,
}

impl CorrelationMatrix {
    /// Validates symmetry, unit diagonal and entry range; does not check
    /// definiteness (see [`psd_repair`] / [`cholesky`]).
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if dim == 0 || data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch);
        }
        for i in 0..dim {
            if (data[i * dim + i] - 1.0).abs() > 1e-12 {
                return Err(LinalgError::InvalidCorrelation("diagonal entry is not 1"));
            }
            for j in 0..i {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > 1e-12 {
                    return Err(LinalgError::InvalidCorrelation("matrix is not symmetric"));
                }
                if !(a.abs() <= 1.0 + 1e-12) {
                    return Err(LinalgError::InvalidCorrelation(
                        "off-diagonal entry outside [-1, 1]",
                    ));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Equicorrelation matrix: 1 on the diagonal, `eta` elsewhere.
    pub fn constant_offdiag(dim: usize, eta: f64) -> Result<Self, LinalgError> {
        let mut m = Self::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    m.data[i * dim + j] = eta;
                }
            }
        }
        Self::new(dim, m.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Principal submatrix on the given (strictly increasing) index set.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        let mut data = vec![0.0; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                data[a * k + b] = self.get(i, j);
            }
        }
        Self { dim: k, data }
    }

    /// Symmetric permutation M[p[i], p[j]].
    pub fn permuted(&self, p: &[usize]) -> Self {
        debug_assert_eq!(p.len(), self.dim);
        let k = self.dim;
        let mut data = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                data[a * k + b] = self.get(p[a], p[b]);
            }
        }
        Self { dim: k, data }
    }
}

/// Lower-triangular factor A with A A^T equal to the source matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    /// Row-major K x K storage; entries above the diagonal are zero.
    lower: Vec<f64>,
    /// True when PSD repair ran before factorization succeeded.
    repaired: bool,
}

impl CholeskyFactor {
    /// Wraps a lower-triangular factor produced elsewhere (e.g. by the
    /// pivoted ordering in the MVN integrator).
    pub(crate) fn from_lower(dim: usize, lower: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), dim * dim);
        Self {
            dim,
            lower,
            repaired: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn was_repaired(&self) -> bool {
        self.repaired
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for i in 0..self.dim {
            let row = &self.lower[i * self.dim..i * self.dim + i + 1];
            out[i] = row.iter().zip(&x[..=i]).map(|(a, b)| a * b).sum();
        }
    }

    /// Solves A y = b by forward substitution.
    pub fn solve_lower(&self, b: &[f64], out: &mut [f64]) -> Result<(), LinalgError> {
        debug_assert_eq!(b.len(), self.dim);
        for i in 0..self.dim {
            let mut s = b[i];
            for j in 0..i {
                s -= self.get(i, j) * out[j];
            }
            let d = self.get(i, i);
            if d.abs() < 1e-12 {
                return Err(LinalgError::SingularMatrix);
            }
            out[i] = s / d;
        }
        Ok(())
    }

    /// 2 * sum(ln diag).
    pub fn log_det(&self) -> Result<f64, LinalgError> {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let d = self.get(i, i);
            if d < 1e-12 {
                return Err(LinalgError::SingularMatrix);
            }
            acc += d.ln();
        }
        Ok(2.0 * acc)
    }
}

/// Whether [`cholesky`] may fall back to PSD repair on failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repair {
    Allow,
    Forbid,
}

/// Cholesky factorization of a correlation matrix.
///
/// With `Repair::Allow`, a numerically semidefinite input is repaired by
/// eigenvalue clipping and refactored; the factor then reports
/// `was_repaired() == true`. With `Repair::Forbid`, a pivot below -1e-10
/// is an error and pivots in [-1e-10, 0] are clamped to zero.
pub fn cholesky(m: &CorrelationMatrix, repair: Repair) -> Result<CholeskyFactor, LinalgError> {
    match cholesky_raw(m) {
        Ok(lower) => Ok(CholeskyFactor {
            dim: m.dim,
            lower,
            repaired: false,
        }),
        Err(_) if repair == Repair::Allow => {
            let fixed = psd_repair(m, DEFAULT_EIGEN_FLOOR);
            let lower = cholesky_raw(&fixed)?;
            Ok(CholeskyFactor {
                dim: m.dim,
                lower,
                repaired: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn cholesky_raw(m: &CorrelationMatrix) -> Result<Vec<f64>, LinalgError> {
    let k = m.dim;
    let mut lower = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for t in 0..j {
                s -= lower[i * k + t] * lower[j * k + t];
            }
            if i == j {
                if s < -PIVOT_TOL {
                    return Err(LinalgError::NotPositiveSemidefinite);
                }
                lower[i * k + i] = s.max(0.0).sqrt();
            } else {
                let d = lower[j * k + j];
                lower[i * k + j] = if d > 0.0 {
                    s / d
                } else if s.abs() <= PIVOT_TOL {
                    0.0
                } else {
                    return Err(LinalgError::NotPositiveSemidefinite);
                };
            }
        }
    }
    Ok(lower)
}

/// Nearest-in-spirit PSD repair: clip eigenvalues at `eigen_floor`,
/// reassemble, rescale back to unit diagonal.
///
/// Returns the input unchanged when its smallest eigenvalue already
/// clears the floor.
pub fn psd_repair(m: &CorrelationMatrix, eigen_floor: f64) -> CorrelationMatrix {
    assert!(eigen_floor > 0.0, "eigen_floor must be positive");
    let k = m.dim;
    let (mut eigvals, eigvecs) = sym_eigen(&m.data, k);
    if eigvals.iter().all(|&l| l >= eigen_floor) {
        return m.clone();
    }
    for l in &mut eigvals {
        if *l < eigen_floor {
            *l = eigen_floor;
        }
    }
    // M' = V diag(l) V^T
    let mut repaired = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = 0.0;
            for t in 0..k {
                s += eigvecs[i * k + t] * eigvals[t] * eigvecs[j * k + t];
            }
            repaired[i * k + j] = s;
            repaired[j * k + i] = s;
        }
    }
    // rescale to a unit diagonal
    let scale: Vec<f64> = (0..k).map(|i| repaired[i * k + i].sqrt().recip()).collect();
    let mut data = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let v = if i == j {
                1.0
            } else {
                (repaired[i * k + j] * scale[i] * scale[j]).clamp(-1.0, 1.0)
            };
            data[i * k + j] = v;
        }
    }
    // enforce exact symmetry against roundoff
    for i in 0..k {
        for j in 0..i {
            let v = 0.5 * (data[i * k + j] + data[j * k + i]);
            data[i * k + j] = v;
            data[j * k + i] = v;
        }
    }
    CorrelationMatrix { dim: k, data }
}

/// Inverse and log-determinant recovered from a Cholesky factor:
/// R^-1 = A^-T A^-1, log det R = 2 sum(ln diag A).
pub fn inverse_and_logdet(f: &CholeskyFactor) -> Result<(Vec<f64>, f64), LinalgError> {
    let k = f.dim;
    let log_det = f.log_det()?;
    // A^-1 by forward substitution, column by column.
    let mut ainv = vec![0.0; k * k];
    for col in 0..k {
        for i in col..k {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for j in col..i {
                s -= f.get(i, j) * ainv[j * k + col];
            }
            ainv[i * k + col] = s / f.get(i, i);
        }
    }
    // R^-1 = A^-T A^-1: (R^-1)_{ij} = sum_t ainv[t, i] * ainv[t, j]
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = 0.0;
            for t in i.max(j)..k {
                s += ainv[t * k + i] * ainv[t * k + j];
            }
            inv[i * k + j] = s;
            inv[j * k + i] = s;
        }
    }
    Ok((inv, log_det))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns of a row-major matrix).
fn sym_eigen(data: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = data.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    if k == 1 {
        return (vec![a[0]], v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                off += a[i * k + j] * a[i * k + j];
            }
        }
        if off.sqrt() < 1e-14 * (k as f64) {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows/cols p and q of A
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for j in 0..k {
                    let apj = a[p * k + j];
                    let aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                a[p * k + q] = 0.0;
                a[q * k + p] = 0.0;
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eig: Vec<f64> = (0..k).map(|i| a[i * k + i]).collect();
    (eig, v)
}
