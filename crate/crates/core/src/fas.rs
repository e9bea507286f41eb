//! Fluid-antenna-system layer: Jakes port correlation, the equivalent
//! (best-port) channel CDF/PDF, outage probability and delay outage rate.
//!
//! The K port gains share one marginal fading law and a Gaussian-copula
//! dependence whose parameter matrix carries the signed Jakes values
//! J0(2 pi |k-l| W / (K-1)). All SNR-like quantities are linear here; dB
//! conversion belongs to the CLI.

use thiserror::Error;

use crate::linalg::{
    cholesky, psd_repair, CholeskyFactor, CorrelationMatrix, LinalgError, Repair,
    DEFAULT_EIGEN_FLOOR,
};
use crate::mvn::{mvn_cdf, MvnError, MvnOpts};
use crate::specfun::{
    bessel_j0, inv_reg_lower_inc_gamma, ln_gamma, reg_lower_inc_gamma, std_normal_quantile,
};

/// Marginal CDF values are clamped to this band before the normal-quantile
/// transform so that boundary inputs cannot inject infinities.
pub(crate) const CDF_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FasError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("marginal CDF sits on the boundary; the density is undefined there")]
    BoundaryDensity,
    #[error(transparent)]
    Mvn(#[from] MvnError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Port count and antenna size (in wavelengths) of the fluid antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FasConfig {
    num_ports: usize,
    width: f64,
}

impl FasConfig {
    pub fn new(num_ports: usize, width: f64) -> Result<Self, FasError> {
        if num_ports < 1 {
            return Err(FasError::InvalidParameter("num_ports must be at least 1"));
        }
        if !(width > 0.0) {
            return Err(FasError::InvalidParameter("width must be positive"));
        }
        Ok(Self { num_ports, width })
    }

    pub fn num_ports(&self) -> usize {
        self.num_ports
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

/// Jakes dependence-parameter matrix before PSD repair.
///
/// Entry (k, l) is J0(2 pi (k - l) W / (K - 1)); K = 1 degenerates to [1].
/// Small antennas with many ports make this numerically rank-deficient,
/// which is why [`jakes_correlation`] repairs it.
pub fn jakes_correlation_raw(config: &FasConfig) -> CorrelationMatrix {
    let k = config.num_ports;
    if k == 1 {
        return CorrelationMatrix::identity(1);
    }
    let mut data = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let sep = (i as f64 - j as f64) / (k as f64 - 1.0);
            data[i * k + j] = if i == j {
                1.0
            } else {
                bessel_j0(2.0 * std::f64::consts::PI * sep * config.width)
            };
        }
    }
    CorrelationMatrix::new(k, data).expect("Jakes construction is symmetric with unit diagonal")
}

/// PSD-repaired Jakes correlation matrix, ready for the copula layer.
pub fn jakes_correlation(config: &FasConfig) -> CorrelationMatrix {
    psd_repair(&jakes_correlation_raw(config), DEFAULT_EIGEN_FLOOR)
}

/// Single-port fading law: CDF, density and quantile of the gain envelope.
pub trait Marginal {
    fn cdf(&self, r: f64) -> f64;
    fn pdf(&self, r: f64) -> f64;
    /// Generalized inverse of the CDF on [0, 1).
    fn quantile(&self, p: f64) -> f64;
}

/// Nakagami-m fading envelope with shape m >= 0.5 and spread mu > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiMarginal {
    m: f64,
    mu: f64,
}

impl NakagamiMarginal {
    pub fn new(m: f64, mu: f64) -> Result<Self, FasError> {
        if !(m >= 0.5) {
            return Err(FasError::InvalidParameter("shape m must be at least 0.5"));
        }
        if !(mu > 0.0) {
            return Err(FasError::InvalidParameter("spread mu must be positive"));
        }
        Ok(Self { m, mu })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Marginal for NakagamiMarginal {
    fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        reg_lower_inc_gamma(self.m, self.m / self.mu * r * r)
            .expect("valid shape and non-negative argument")
    }

    fn pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        if r == 0.0 {
            // finite only at the Rayleigh-half boundary m = 1/2
            return if self.m == 0.5 {
                2.0 * (self.m / self.mu).sqrt() / std::f64::consts::PI.sqrt()
            } else {
                0.0
            };
        }
        let ln_pdf = std::f64::consts::LN_2 + self.m * (self.m / self.mu).ln()
            + (2.0 * self.m - 1.0) * r.ln()
            - self.m / self.mu * r * r
            - ln_gamma(self.m);
        ln_pdf.exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..1.0).contains(&p), "quantile defined on [0, 1)");
        let x = inv_reg_lower_inc_gamma(self.m, p).expect("valid shape and probability");
        (self.mu / self.m * x).sqrt()
    }
}

/// Average transmit SNR and outage threshold, both linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrParams {
    pub gamma_bar: f64,
    pub gamma_th: f64,
}

impl SnrParams {
    pub fn new(gamma_bar: f64, gamma_th: f64) -> Result<Self, FasError> {
        if !(gamma_bar > 0.0) || !(gamma_th > 0.0) {
            return Err(FasError::InvalidParameter("SNR parameters must be positive"));
        }
        Ok(Self { gamma_bar, gamma_th })
    }

    /// Gain threshold: the outage event is {h_FAS <= sqrt(gamma_th/gamma_bar)}.
    pub fn gain_threshold(&self) -> f64 {
        (self.gamma_th / self.gamma_bar).sqrt()
    }
}

/// Delay-outage inputs: R data bits over bandwidth B within deadline T_th.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DorParams {
    pub data_bits: f64,
    pub bandwidth_hz: f64,
    pub deadline_s: f64,
}

impl DorParams {
    pub fn new(data_bits: f64, bandwidth_hz: f64, deadline_s: f64) -> Result<Self, FasError> {
        if !(data_bits > 0.0) || !(bandwidth_hz > 0.0) || !(deadline_s > 0.0) {
            return Err(FasError::InvalidParameter("DOR parameters must be positive"));
        }
        Ok(Self {
            data_bits,
            bandwidth_hz,
            deadline_s,
        })
    }

    /// SNR the channel must reach to deliver R bits by the deadline:
    /// exp(R ln2 / (B T_th)) - 1.
    pub fn equivalent_gamma_th(&self) -> f64 {
        let exponent =
            self.data_bits * std::f64::consts::LN_2 / (self.bandwidth_hz * self.deadline_s);
        exponent.exp_m1()
    }

    /// Gain threshold sqrt((e^x - 1)/gamma_bar) for the delay outage event.
    pub fn gain_threshold(&self, gamma_bar: f64) -> f64 {
        (self.equivalent_gamma_th() / gamma_bar).sqrt()
    }
}

/// Normal-quantile transform of a marginal CDF value with the boundary
/// clamp applied; the exact-0/1 cases are resolved by the callers.
fn gaussian_limit(p: f64) -> f64 {
    let pc = p.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
    std_normal_quantile(pc).expect("clamped probability is interior")
}

/// Best-port channel CDF F_FAS(r) under the Jakes-fitted Gaussian copula.
pub fn fas_cdf<M: Marginal + ?Sized>(
    r: f64,
    config: &FasConfig,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    fas_cdf_with_corr(r, &jakes_correlation(config), marginal, opts)
}

/// Same as [`fas_cdf`] with an explicit (already PSD) dependence matrix.
pub fn fas_cdf_with_corr<M: Marginal + ?Sized>(
    r: f64,
    corr: &CorrelationMatrix,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    let p = marginal.cdf(r);
    if p <= 0.0 {
        return Ok(0.0);
    }
    if p >= 1.0 {
        return Ok(1.0);
    }
    if corr.dim() == 1 {
        return Ok(p);
    }
    let b = gaussian_limit(p);
    let upper = vec![b; corr.dim()];
    Ok(mvn_cdf(&upper, corr, opts)?.value)
}

/// Best-port channel density f_FAS(r), the derivative of [`fas_cdf`]
/// along the diagonal:
///
///   f(r) * sum_k Phi_{K-1}( b (1 - rho_jk) / sqrt(1 - rho_jk^2), j != k )
///
/// where the (K-1)-dimensional CDF uses the conditional correlation of
/// the remaining ports given port k sitting at the limit b.
pub fn fas_pdf<M: Marginal + ?Sized>(
    r: f64,
    config: &FasConfig,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    fas_pdf_with_corr(r, &jakes_correlation(config), marginal, opts)
}

/// Same as [`fas_pdf`] with an explicit (already PSD) dependence matrix.
pub fn fas_pdf_with_corr<M: Marginal + ?Sized>(
    r: f64,
    corr: &CorrelationMatrix,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    let k = corr.dim();
    let p = marginal.cdf(r);
    if p <= 0.0 || p >= 1.0 {
        return Err(FasError::BoundaryDensity);
    }
    let marginal_pdf = marginal.pdf(r);
    if k == 1 {
        return Ok(marginal_pdf);
    }
    let b = gaussian_limit(p);
    let mut sum = 0.0;
    let mut limits = vec![0.0; k - 1];
    let mut cond = vec![0.0; (k - 1) * (k - 1)];
    for pivot in 0..k {
        let others: Vec<usize> = (0..k).filter(|&j| j != pivot).collect();
        for (a, &j) in others.iter().enumerate() {
            let lam = corr.get(j, pivot);
            let denom = (1.0 - lam * lam).max(1e-300).sqrt();
            limits[a] = b * (1.0 - lam) / denom;
            for (bb, &l) in others.iter().enumerate() {
                let v = if j == l {
                    1.0
                } else {
                    let lam_l = corr.get(l, pivot);
                    let denom_l = (1.0 - lam_l * lam_l).max(1e-300).sqrt();
                    ((corr.get(j, l) - lam * lam_l) / (denom * denom_l)).clamp(-1.0, 1.0)
                };
                cond[a * (k - 1) + bb] = v;
            }
        }
        let cond_corr = CorrelationMatrix::new(k - 1, cond.clone())?;
        sum += mvn_cdf(&limits, &cond_corr, opts)?.value;
    }
    Ok(marginal_pdf * sum)
}

/// Outage probability: P(gamma <= gamma_th) = F_FAS(sqrt(gamma_th/gamma_bar)).
pub fn outage_probability<M: Marginal + ?Sized>(
    snr: &SnrParams,
    config: &FasConfig,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    fas_cdf(snr.gain_threshold(), config, marginal, opts)
}

/// Outage probability with an explicit dependence matrix.
pub fn outage_probability_with_corr<M: Marginal + ?Sized>(
    snr: &SnrParams,
    corr: &CorrelationMatrix,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    fas_cdf_with_corr(snr.gain_threshold(), corr, marginal, opts)
}

/// Delay outage rate: the probability that delivering `dor.data_bits`
/// over `dor.bandwidth_hz` takes longer than `dor.deadline_s`.
///
/// This is the outage probability at the equivalent SNR threshold
/// exp(R ln2/(B T_th)) - 1, evaluated through the identical code path.
pub fn delay_outage_rate<M: Marginal + ?Sized>(
    dor: &DorParams,
    gamma_bar: f64,
    config: &FasConfig,
    marginal: &M,
    opts: &MvnOpts,
) -> Result<f64, FasError> {
    if !(gamma_bar > 0.0) {
        return Err(FasError::InvalidParameter("gamma_bar must be positive"));
    }
    let snr = SnrParams {
        gamma_bar,
        gamma_th: dor.equivalent_gamma_th(),
    };
    outage_probability(&snr, config, marginal, opts)
}

/// Convenience: Cholesky factor of the repaired Jakes matrix.
pub fn jakes_factor(config: &FasConfig) -> CholeskyFactor {
    cholesky(&jakes_correlation(config), Repair::Allow)
        .expect("repaired Jakes matrix always factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvn::MvnOpts;

    fn nak(m: f64, mu: f64) -> NakagamiMarginal {
        NakagamiMarginal::new(m, mu).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FasConfig::new(0, 0.5).is_err());
        assert!(FasConfig::new(2, 0.0).is_err());
        assert!(FasConfig::new(2, -1.0).is_err());
        assert!(FasConfig::new(1, 0.5).is_ok());
    }

    #[test]
    fn jakes_base_cases() {
        let one = jakes_correlation(&FasConfig::new(1, 0.3).unwrap());
        assert_eq!(one.dim(), 1);
        assert_eq!(one.get(0, 0), 1.0);

        // K = 2 separation is W itself
        let two = jakes_correlation(&FasConfig::new(2, 0.1).unwrap());
        assert!((two.get(0, 1) - 0.9037126421).abs() < 1e-9);
        assert_eq!(two.get(0, 1), two.get(1, 0));

        // signed J0 retained: the W = 0.5 rendezvous with the negative lobe
        let neg = jakes_correlation(&FasConfig::new(2, 0.5).unwrap());
        assert!((neg.get(0, 1) - (-0.3042421776)).abs() < 1e-9);
    }

    #[test]
    fn jakes_is_repaired() {
        let cfg = FasConfig::new(8, 0.05).unwrap();
        let m = jakes_correlation(&cfg);
        assert!(crate::linalg::cholesky(&m, Repair::Forbid).is_ok());
    }

    #[test]
    fn nakagami_marginal_closed_forms() {
        let ray = nak(1.0, 1.0);
        assert!((ray.cdf(1.0) - 0.6321205588285577).abs() < 1e-14);
        assert!((ray.pdf(1.0) - 0.7357588823428846).abs() < 1e-14);
        assert_eq!(ray.cdf(0.0), 0.0);
        assert_eq!(ray.cdf(-1.0), 0.0);
        assert!(NakagamiMarginal::new(0.4, 1.0).is_err());
        assert!(NakagamiMarginal::new(1.0, 0.0).is_err());
    }

    #[test]
    fn nakagami_quantile_round_trips() {
        for &(m, mu) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 0.7), (3.0, 1.3)] {
            let nk = nak(m, mu);
            for &p in &[0.0, 1e-6, 0.05, 0.4, 0.77, 0.999] {
                let r = nk.quantile(p);
                assert!(r >= 0.0);
                assert!(
                    (nk.cdf(r) - p).abs() < 1e-9,
                    "m={m} mu={mu} p={p}: r={r} gives {}",
                    nk.cdf(r)
                );
            }
        }
    }

    #[test]
    fn nakagami_pdf_integrates_to_one() {
        // plain trapezoid on a fine grid as an independent quadrature
        for &(m, mu) in &[(0.5, 1.0), (1.0, 1.0), (3.0, 1.0)] {
            let nk = nak(m, mu);
            let hi = nk.quantile(1.0 - 1e-12);
            let n = 40_000;
            let h = hi / n as f64;
            let mut acc = 0.5 * (nk.pdf(0.0) + nk.pdf(hi));
            for i in 1..n {
                acc += nk.pdf(i as f64 * h);
            }
            let integral = acc * h;
            assert!((integral - 1.0).abs() < 1e-6, "m={m} mu={mu}: {integral}");
        }
    }

    #[test]
    fn cdf_trivial_reductions() {
        let opts = MvnOpts::default();
        let ray = nak(1.0, 1.0);

        // r = 0 forces all limits to -inf
        let cfg = FasConfig::new(4, 0.5).unwrap();
        assert_eq!(fas_cdf(0.0, &cfg, &ray, &opts).unwrap(), 0.0);

        // SISO reduces to the marginal exactly
        let siso = FasConfig::new(1, 0.5).unwrap();
        assert_eq!(fas_cdf(1.0, &siso, &ray, &opts).unwrap(), ray.cdf(1.0));

        // independence product
        let ident = CorrelationMatrix::identity(2);
        let v = fas_cdf_with_corr(1.0, &ident, &ray, &opts).unwrap();
        assert!((v - 0.3995764008937280).abs() < 5e-5, "{v}");
    }

    #[test]
    fn outage_closed_forms() {
        let opts = MvnOpts::default();
        let ray = nak(1.0, 1.0);
        // gamma_th = 0 dB (1.0), gamma_bar = 10 dB (10.0)
        let snr = SnrParams::new(10.0, 1.0).unwrap();
        let siso = FasConfig::new(1, 0.5).unwrap();
        let p1 = outage_probability(&snr, &siso, &ray, &opts).unwrap();
        assert!((p1 - 0.09516258196404043).abs() < 1e-12);

        let ident = CorrelationMatrix::identity(2);
        let p2 = outage_probability_with_corr(&snr, &ident, &ray, &opts).unwrap();
        assert!((p2 - 0.009055917006062712).abs() < 5e-5);

        // comonotone limit collapses to the SISO value
        let como = crate::linalg::psd_repair(
            &CorrelationMatrix::constant_offdiag(2, 1.0).unwrap(),
            DEFAULT_EIGEN_FLOOR,
        );
        let pc = outage_probability_with_corr(&snr, &como, &ray, &opts).unwrap();
        assert!((pc - p1).abs() < 1e-3, "{pc} vs {p1}");
    }

    #[test]
    fn dor_matches_op_bit_for_bit() {
        let opts = MvnOpts::default();
        let ray = nak(1.0, 1.0);
        let cfg = FasConfig::new(3, 1.0).unwrap();
        let dor = DorParams::new(5000.0, 2e6, 3e-3).unwrap();
        let gamma_bar = 100.0;
        let via_dor = delay_outage_rate(&dor, gamma_bar, &cfg, &ray, &opts).unwrap();
        let via_op = outage_probability(
            &SnrParams::new(gamma_bar, dor.equivalent_gamma_th()).unwrap(),
            &cfg,
            &ray,
            &opts,
        )
        .unwrap();
        assert_eq!(via_dor.to_bits(), via_op.to_bits());
    }

    #[test]
    fn dor_scalar_chain() {
        // frozen from direct arithmetic: x = 5000 ln2 / (2e6 * 3e-3),
        // T = sqrt((e^x - 1)/100), DOR_SISO = 1 - exp(-T^2)
        let dor = DorParams::new(5000.0, 2e6, 3e-3).unwrap();
        assert!((dor.equivalent_gamma_th() - 0.7817974362806786).abs() < 1e-12);
        assert!((dor.gain_threshold(100.0) - 0.08841930989782032).abs() < 1e-12);
        let opts = MvnOpts::default();
        let siso = FasConfig::new(1, 0.5).unwrap();
        let v = delay_outage_rate(&dor, 100.0, &siso, &nak(1.0, 1.0), &opts).unwrap();
        assert!((v - 0.007787493485866238).abs() < 1e-12, "{v}");
    }

    #[test]
    fn dor_bandwidth_limit() {
        let opts = MvnOpts::default();
        let cfg = FasConfig::new(2, 0.5).unwrap();
        let huge_b = DorParams::new(5000.0, 1e18, 3e-3).unwrap();
        let v = delay_outage_rate(&huge_b, 100.0, &cfg, &nak(1.0, 1.0), &opts).unwrap();
        assert!(v < 1e-12, "{v}");
    }

    #[test]
    fn pdf_reductions() {
        let opts = MvnOpts::default();
        let ray = nak(1.0, 1.0);
        // K = 1: marginal pdf exactly
        let siso = FasConfig::new(1, 0.5).unwrap();
        let v = fas_pdf(1.0, &siso, &ray, &opts).unwrap();
        assert!((v - ray.pdf(1.0)).abs() < 1e-14);

        // independence: the max of two i.i.d. draws has density 2 F(r) f(r)
        let ident = CorrelationMatrix::identity(2);
        let v2 = fas_pdf_with_corr(1.0, &ident, &ray, &opts).unwrap();
        assert!((v2 - 0.9301766317393185).abs() < 1e-10, "{v2}");

        // boundary r is a domain error
        let cfg2 = FasConfig::new(2, 0.5).unwrap();
        assert_eq!(
            fas_pdf(0.0, &cfg2, &ray, &opts),
            Err(FasError::BoundaryDensity)
        );
    }

    #[test]
    fn snr_and_dor_validation() {
        assert!(SnrParams::new(0.0, 1.0).is_err());
        assert!(SnrParams::new(1.0, -2.0).is_err());
        assert!(DorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DorParams::new(1.0, 1.0, 0.0).is_err());
        let snr = SnrParams::new(10.0, 1.0).unwrap();
        assert!((snr.gain_threshold() - 0.1_f64.sqrt()).abs() < 1e-16);
    }
}
