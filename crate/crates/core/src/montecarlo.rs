//! Seedable simulation oracles for the analytic channel statistics.
//!
//! Two independent sampling routes exist on purpose: the copula route
//! (uniforms through the marginal quantile) realizes exactly the law the
//! analytic formulas describe, while the direct Jakes route builds
//! correlated Nakagami gains from sums of 2m squared correlated Gaussians
//! without ever touching the copula. Their agreement is the empirical
//! backbone of the whole model.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::copula::{sample_copula, CopulaError, SampleBatch, SampleKind};
use crate::fas::{jakes_correlation, FasConfig, FasError, Marginal};
use crate::linalg::{cholesky, Repair};
use crate::stream::{substream_rng, CHUNK_ROWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum McError {
    #[error("direct Jakes sampling requires 2m to be a positive integer")]
    UnsupportedShape,
    #[error("scatter pairs are defined for exactly 2 ports")]
    NotTwoPorts,
    #[error(transparent)]
    Copula(#[from] CopulaError),
    #[error(transparent)]
    Fas(#[from] FasError),
}

/// Binomial estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Correlated per-port gains plus the best-port (row maximum) column.
#[derive(Debug, Clone, PartialEq)]
pub struct FasSample {
    pub batch: SampleBatch,
    pub best: Vec<f64>,
}

/// Copula-route channel sampler: correlated uniforms from the Jakes-fitted
/// Gaussian copula, pushed through the marginal quantile, with the
/// row-wise maximum appended as the activated port.
pub fn sample_fas_gains<M: Marginal + ?Sized + Sync>(
    config: &FasConfig,
    marginal: &M,
    n: usize,
    seed: u64,
) -> Result<FasSample, McError> {
    let corr = jakes_correlation(config);
    let uniforms = sample_copula(&corr, n, seed)?;
    // guard against u rounding up to exactly 1.0 in the extreme tail
    let batch = uniforms.map_into_gains(|u| marginal.quantile(u.min(1.0 - 1e-16)));
    let best = row_max(&batch);
    Ok(FasSample { batch, best })
}

fn row_max(batch: &SampleBatch) -> Vec<f64> {
    let k = batch.cols();
    batch
        .values()
        .par_chunks(CHUNK_ROWS * k)
        .flat_map_iter(|chunk| {
            chunk
                .chunks(k)
                .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Direct Jakes-model sampler, bypassing the copula entirely.
///
/// Draws 2m independent K-vectors of Gaussians with cross-port covariance
/// (mu/2m) * J0(2 pi (k-l) W/(K-1)) through the repaired Cholesky factor;
/// the port gain is the root of the sum of squares, marginally
/// Nakagami(m, mu). Only half-integer shapes admit this construction.
pub fn sample_jakes_ports(
    config: &FasConfig,
    m: f64,
    mu: f64,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, McError> {
    let comps_f = 2.0 * m;
    if !(comps_f >= 1.0) || (comps_f - comps_f.round()).abs() > 1e-9 {
        return Err(McError::UnsupportedShape);
    }
    if !(mu > 0.0) {
        return Err(McError::Copula(CopulaError::Domain));
    }
    if n == 0 {
        return Err(McError::Copula(CopulaError::EmptySample));
    }
    let comps = comps_f.round() as usize;
    let sigma = (mu / comps_f).sqrt();
    let k = config.num_ports();
    let factor = cholesky(&jakes_correlation(config), Repair::Allow)
        .expect("repaired Jakes matrix always factors");

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
                let out = &mut chunk[row * k..(row + 1) * k];
                out.fill(0.0);
                for _ in 0..comps {
                    for zi in z.iter_mut() {
                        *zi = rng.sample(StandardNormal);
                    }
                    factor.mul_vec(&z, &mut v);
                    for (o, &vj) in out.iter_mut().zip(&v) {
                        let g = sigma * vj;
                        *o += g * g;
                    }
                }
                for o in out.iter_mut() {
                    *o = o.sqrt();
                }
            }
        });
    Ok(SampleBatch::new(n, k, values, seed, SampleKind::Gain))
}

/// Best-port gains from the direct Jakes construction.
pub fn sample_jakes_direct(
    config: &FasConfig,
    m: f64,
    mu: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, McError> {
    let batch = sample_jakes_ports(config, m, mu, n, seed)?;
    Ok(row_max(&batch))
}

/// Empirical P(sample <= threshold) with its binomial standard error.
pub fn estimate_exceedance(samples: &[f64], threshold: f64) -> McEstimate {
    assert!(samples.len() >= 100, "estimator needs at least 100 samples");
    let n = samples.len();
    let hits = samples.iter().filter(|&&x| x <= threshold).count();
    let value = hits as f64 / n as f64;
    McEstimate {
        value,
        std_err: (value * (1.0 - value) / n as f64).sqrt(),
        n,
    }
}

/// Which generator feeds a 2-port scatter dump.
pub enum ScatterSource<'a> {
    /// Copula uniforms (u1, u2).
    CopulaUniform,
    /// Copula uniforms pushed through a marginal quantile.
    CopulaMarginal(&'a (dyn Marginal + Sync)),
    /// The direct Jakes construction; requires half-integer m.
    JakesDirect { m: f64, mu: f64 },
}

/// (x, y) pairs for dependence scatterplots of a 2-port system.
pub fn scatter_pairs(
    config: &FasConfig,
    source: ScatterSource<'_>,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, McError> {
    if config.num_ports() != 2 {
        return Err(McError::NotTwoPorts);
    }
    let batch = match source {
        ScatterSource::CopulaUniform => sample_copula(&jakes_correlation(config), n, seed)?,
        ScatterSource::CopulaMarginal(marginal) => {
            sample_fas_gains(config, marginal, n, seed)?.batch
        }
        ScatterSource::JakesDirect { m, mu } => sample_jakes_ports(config, m, mu, n, seed)?,
    };
    Ok((0..n).map(|i| (batch.get(i, 0), batch.get(i, 1))).collect())
}
