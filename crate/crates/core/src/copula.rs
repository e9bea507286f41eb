//! Gaussian copula layer: CDF and density, the closed-form rank
//! correlation transforms, the Cholesky-based sampler, and empirical rank
//! statistics.
//!
//! The sampler draws independent standard normals S, correlates them
//! through the lower factor (V = A S), and maps each component through
//! the univariate normal CDF, which makes every margin exactly uniform.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

use crate::fas::CDF_CLAMP;
use crate::linalg::{cholesky, CholeskyFactor, CorrelationMatrix, LinalgError, Repair};
use crate::mvn::{mvn_cdf, MvnError, MvnOpts};
use crate::specfun::{std_normal_cdf, std_normal_quantile};
use crate::stream::{substream_rng, CHUNK_ROWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CopulaError {
    #[error("vector length does not match the correlation dimension")]
    DimensionMismatch,
    #[error("argument outside its domain")]
    Domain,
    #[error("column is constant; rank correlation is undefined")]
    DegenerateColumn,
    #[error("sample count must be positive")]
    EmptySample,
    #[error(transparent)]
    Mvn(#[from] MvnError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Whether a batch holds copula uniforms or channel gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Uniform,
    Gain,
}

/// An n x K matrix of correlated draws together with the seed that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    k: usize,
    values: Vec<f64>,
    seed: u64,
    kind: SampleKind,
}

impl SampleBatch {
    pub(crate) fn new(n: usize, k: usize, values: Vec<f64>, seed: u64, kind: SampleKind) -> Self {
        debug_assert_eq!(values.len(), n * k);
        Self {
            n,
            k,
            values,
            seed,
            kind,
        }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.k + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.k..(row + 1) * self.k]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Applies a strictly increasing map to every entry, retagging the batch.
    pub(crate) fn map_into_gains(mut self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        self.values.par_chunks_mut(CHUNK_ROWS * self.k).for_each(|chunk| {
            for v in chunk.iter_mut() {
                *v = f(*v);
            }
        });
        self.kind = SampleKind::Gain;
        self
    }
}

// ---------------------------------------------------------------------------
// CDF and density
// ---------------------------------------------------------------------------

/// Gaussian copula CDF C(u) = Phi_R(phi^-1(u_1), ..., phi^-1(u_K)).
///
/// Components equal to 1 marginalize out; any component equal to 0 forces
/// the result to 0. Interior components are clamped away from the
/// boundary before the quantile transform.
pub fn gaussian_copula_cdf(
    u: &[f64],
    corr: &CorrelationMatrix,
    opts: &MvnOpts,
) -> Result<f64, CopulaError> {
    if u.len() != corr.dim() {
        return Err(CopulaError::DimensionMismatch);
    }
    if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(CopulaError::Domain);
    }
    if u.iter().any(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let limits: Vec<f64> = u
        .iter()
        .map(|&x| {
            if x == 1.0 {
                f64::INFINITY
            } else {
                std_normal_quantile(x.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP)).expect("interior u")
            }
        })
        .collect();
    Ok(mvn_cdf(&limits, corr, opts)?.value)
}

/// Gaussian copula density at a strictly interior point:
/// exp(-phi^T (R^-1 - I) phi / 2) / sqrt(det R), identically 1 when R = I.
pub fn gaussian_copula_density(u: &[f64], factor: &CholeskyFactor) -> Result<f64, CopulaError> {
    let k = factor.dim();
    if u.len() != k {
        return Err(CopulaError::DimensionMismatch);
    }
    if u.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
        return Err(CopulaError::Domain);
    }
    let phi: Vec<f64> = u
        .iter()
        .map(|&x| std_normal_quantile(x.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP)).expect("interior u"))
        .collect();
    let mut solved = vec![0.0; k];
    factor.solve_lower(&phi, &mut solved)?;
    let q_transformed: f64 = solved.iter().map(|y| y * y).sum();
    let q_plain: f64 = phi.iter().map(|y| y * y).sum();
    let log_det = factor.log_det()?;
    Ok((-0.5 * (q_transformed - q_plain) - 0.5 * log_det).exp())
}

// ---------------------------------------------------------------------------
// Rank-correlation transforms (exact closed forms)
// ---------------------------------------------------------------------------

fn check_unit_interval(x: f64) -> Result<f64, CopulaError> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else {
        Err(CopulaError::Domain)
    }
}

/// Spearman's rho of a bivariate Gaussian copula: (6/pi) asin(eta/2).
pub fn spearman_from_eta(eta: f64) -> Result<f64, CopulaError> {
    let eta = check_unit_interval(eta)?;
    Ok(6.0 / PI * (0.5 * eta).asin())
}

/// Kendall's tau of a bivariate Gaussian copula: (2/pi) asin(eta).
pub fn kendall_from_eta(eta: f64) -> Result<f64, CopulaError> {
    let eta = check_unit_interval(eta)?;
    Ok(2.0 / PI * eta.asin())
}

/// Inverse of [`spearman_from_eta`]: 2 sin(pi rho_s / 6).
pub fn eta_from_spearman(rho_s: f64) -> Result<f64, CopulaError> {
    let rho_s = check_unit_interval(rho_s)?;
    Ok(2.0 * (PI * rho_s / 6.0).sin())
}

/// Inverse of [`kendall_from_eta`]: sin(pi tau_k / 2).
pub fn eta_from_kendall(tau_k: f64) -> Result<f64, CopulaError> {
    let tau_k = check_unit_interval(tau_k)?;
    Ok((PI * tau_k / 2.0).sin())
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws n i.i.d. rows from the Gaussian copula with dependence matrix R.
///
/// Work is split into fixed-size chunks, each with its own substream of
/// `seed`, so the batch is identical under any thread count.
pub fn sample_copula(
    corr: &CorrelationMatrix,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, CopulaError> {
    if n == 0 {
        return Err(CopulaError::EmptySample);
    }
    let factor = cholesky(corr, Repair::Allow)?;
    let k = corr.dim();
    let mut values = vec![0.0; n * k];
    values
        .par_chunks_mut(CHUNK_ROWS * k)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let mut rng = substream_rng(seed, ci as u64);
            let rows = chunk.len() / k;
            let mut z = vec![0.0; k];
            let mut v = vec![0.0; k];
            for row in 0..rows {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                factor.mul_vec(&z, &mut v);
                for (j, &vj) in v.iter().enumerate() {
                    chunk[row * k + j] = std_normal_cdf(vj);
                }
            }
        });
    Ok(SampleBatch::new(n, k, values, seed, SampleKind::Uniform))
}

// ---------------------------------------------------------------------------
// Empirical rank statistics
// ---------------------------------------------------------------------------

/// Average ranks (1-based, ties averaged).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 * 0.5 + 1.0;
        for t in i..=j {
            out[idx[t]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, CopulaError> {
    if xs.len() != ys.len() {
        return Err(CopulaError::DimensionMismatch);
    }
    let n = xs.len();
    if n < 2 {
        return Err(CopulaError::EmptySample);
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let mean = (n as f64 + 1.0) * 0.5;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let a = rx[i] - mean;
        let b = ry[i] - mean;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CopulaError::DegenerateColumn);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Kendall's tau-b: concordance count with tie correction, O(n log n)
/// through a merge sort that counts discordant swaps.
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Result<f64, CopulaError> {
    if xs.len() != ys.len() {
        return Err(CopulaError::DimensionMismatch);
    }
    let n = xs.len();
    if n < 2 {
        return Err(CopulaError::EmptySample);
    }

    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    fn tie_pairs(run: usize) -> u64 {
        (run as u64) * (run as u64 - 1) / 2
    }

    // ties in x and joint ties, over the (x, y)-sorted order
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut run_x = 1usize;
    let mut run_xy = 1usize;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += tie_pairs(run_x);
            run_x = 1;
            tied_xy += tie_pairs(run_xy);
            run_xy = 1;
        }
    }
    tied_x += tie_pairs(run_x);
    tied_xy += tie_pairs(run_xy);

    // merge sort by y counting swaps = discordant pairs
    let mut swaps = 0u64;
    let mut work: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    let mut width = 1usize;
    while width < n {
        let mut start = 0usize;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut out) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || pairs[i].1 <= pairs[j].1) {
                    work[out] = pairs[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    work[out] = pairs[j];
                    j += 1;
                }
                out += 1;
            }
            start = end;
        }
        std::mem::swap(&mut pairs, &mut work);
        width *= 2;
    }

    let mut tied_y = 0u64;
    let mut run_y = 1usize;
    for i in 1..n {
        if pairs[i].1 == pairs[i - 1].1 {
            run_y += 1;
        } else {
            tied_y += tie_pairs(run_y);
            run_y = 1;
        }
    }
    tied_y += tie_pairs(run_y);

    let total = (n as u64) * (n as u64 - 1) / 2;
    let denom = ((total - tied_x) as f64) * ((total - tied_y) as f64);
    if denom == 0.0 {
        return Err(CopulaError::DegenerateColumn);
    }
    let con_minus_dis =
        total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    Ok((con_minus_dis / denom.sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho between two columns of a batch.
pub fn empirical_spearman(
    batch: &SampleBatch,
    col_a: usize,
    col_b: usize,
) -> Result<f64, CopulaError> {
    spearman_rho(&batch.column(col_a), &batch.column(col_b))
}

/// Kendall's tau-b between two columns of a batch.
pub fn empirical_kendall(
    batch: &SampleBatch,
    col_a: usize,
    col_b: usize,
) -> Result<f64, CopulaError> {
    kendall_tau_b(&batch.column(col_a), &batch.column(col_b))
}
