//! Scalar special functions used by the analytic channel formulas.
//!
//! Every routine here is a pure `f64` kernel targeting ~1e-14 absolute
//! accuracy on its stated domain, so that the 1e-6..1e-3 tolerances used
//! by the integration and copula layers have plenty of headroom.

use std::f64::consts::PI;

use thiserror::Error;

/// 1/sqrt(pi)
const FRAC_1_SQRT_PI: f64 = 0.5641895835477562869;
/// sqrt(pi)/2
const FRAC_SQRT_PI_2: f64 = 0.8862269254527580137;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SpecFunError {
    #[error("argument outside the function domain")]
    Domain,
    #[error("series or continued fraction failed to converge")]
    NoConvergence,
}

// ---------------------------------------------------------------------------
// Error function (Cody's rational minimax approximations, as in netlib
// CALERF: three branches at 0.46875 and 4.0, with the split-exponential
// trick for the erfc scaling factor).
// ---------------------------------------------------------------------------

const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

/// Rational part of erfc(y)*exp(y^2) for y > 0.46875.
fn erfcx_tail(y: f64) -> f64 {
    if y <= 4.0 {
        let mut xnum = ERF_C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + ERF_C[i]) * y;
            xden = (xden + ERF_D[i]) * y;
        }
        (xnum + ERF_C[7]) / (xden + ERF_D[7])
    } else {
        let ysq = 1.0 / (y * y);
        let mut xnum = ERF_P[5] * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + ERF_P[i]) * ysq;
            xden = (xden + ERF_Q[i]) * ysq;
        }
        let r = ysq * (xnum + ERF_P[4]) / (xden + ERF_Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    }
}

/// exp(-y^2) evaluated as exp(-t^2)*exp(-(y-t)(y+t)) with t = trunc(16y)/16,
/// which keeps the product accurate when y^2 is large.
fn exp_neg_sq(y: f64) -> f64 {
    let t = (y * 16.0).trunc() / 16.0;
    let del = (y - t) * (y + t);
    (-t * t).exp() * (-del).exp()
}

/// Error function, accurate to ~1 ulp over the whole real line.
pub fn erf(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 0.46875 {
        let ysq = if ax > 1e-300 { x * x } else { 0.0 };
        let mut xnum = ERF_A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + ERF_A[i]) * ysq;
            xden = (xden + ERF_B[i]) * ysq;
        }
        x * (xnum + ERF_A[3]) / (xden + ERF_B[3])
    } else {
        let ec = erfc_positive(ax);
        if x > 0.0 {
            1.0 - ec
        } else {
            ec - 1.0
        }
    }
}

fn erfc_positive(y: f64) -> f64 {
    debug_assert!(y > 0.46875);
    if y > 26.6 {
        return 0.0; // underflow: erfc(26.6) < 1e-308
    }
    exp_neg_sq(y) * erfcx_tail(y)
}

/// Complementary error function 1 - erf(x), without cancellation for x > 0.
pub fn erfc(x: f64) -> f64 {
    if x.abs() <= 0.46875 {
        1.0 - erf(x)
    } else if x > 0.0 {
        erfc_positive(x)
    } else {
        2.0 - erfc_positive(-x)
    }
}

/// Scaled complementary error function exp(x^2)*erfc(x) for x >= 0.
fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= 0.46875 {
        (x * x).exp() * (1.0 - erf(x))
    } else {
        erfcx_tail(x)
    }
}

/// Inverse error function on (-1, 1).
///
/// A Winitzki-style initial approximation is polished by safeguarded
/// Newton steps on erf (central range) or on erfc via the scaled form
/// (tails), giving full double precision: erf(erfinv(p)) = p to ~1e-15
/// relative.
pub fn erfinv(p: f64) -> Result<f64, SpecFunError> {
    if !(p.abs() < 1.0) {
        return Err(SpecFunError::Domain);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let q = p.abs();

    // ln(1 - q^2) = ln(1 - q) + ln(1 + q), without forming 1 - q^2.
    let l = (-q).ln_1p() + q.ln_1p();
    let a = 0.147;
    let t = 2.0 / (PI * a) + 0.5 * l;
    let mut z = (((t * t - l / a).sqrt()) - t).sqrt();

    if q <= 0.9375 {
        // Newton on erf(z) - q; |initial error| ~ 2e-3 so three steps reach
        // machine precision.
        for _ in 0..4 {
            let err = erf(z) - q;
            let step = err * FRAC_SQRT_PI_2 * (z * z).exp();
            z -= step;
            if step.abs() <= 1e-16 * (1.0 + z) {
                break;
            }
        }
    } else {
        // Tail: Newton on erfc(z) - c with c = 1 - q, using erfcx to avoid
        // overflow of exp(z^2) in the step.
        let c = 1.0 - q;
        let ln_c = c.ln();
        for _ in 0..8 {
            let step = FRAC_SQRT_PI_2 * (erfcx(z) - (ln_c + z * z).exp());
            z += step;
            if step.abs() <= 1e-16 * (1.0 + z) {
                break;
            }
        }
    }
    Ok(if p > 0.0 { z } else { -z })
}

/// Standard normal CDF computed through erfc for tail accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

// Acklam's rational approximation to the normal quantile (central and
// tail branches, |relative error| < 1.15e-9 before polishing).
const NQ_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const NQ_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const NQ_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const NQ_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Standard normal quantile on (0, 1), equal to sqrt(2) erfinv(2u - 1).
///
/// Acklam's rational approximation followed by one Halley step against
/// the erfc-based CDF brings the result to ~1 ulp; this sits in the inner
/// loop of the QMC integrator, so it avoids the slower erfinv route.
pub fn std_normal_quantile(u: f64) -> Result<f64, SpecFunError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(SpecFunError::Domain);
    }
    let x = if u < 0.02425 {
        let q = (-2.0 * u.ln()).sqrt();
        rational_tail(q) // negative by construction
    } else if u > 1.0 - 0.02425 {
        let q = (-2.0 * (-u).ln_1p()).sqrt(); // ln(1-u) without cancellation
        -rational_tail(q)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((NQ_A[0] * r + NQ_A[1]) * r + NQ_A[2]) * r + NQ_A[3]) * r + NQ_A[4]) * r + NQ_A[5])
            * q
            / (((((NQ_B[0] * r + NQ_B[1]) * r + NQ_B[2]) * r + NQ_B[3]) * r + NQ_B[4]) * r + 1.0)
    };
    // Halley polish: e = Phi(x) - u, with the tail-stable CDF. Skipped in
    // the extreme tail where exp(x^2/2) overflows; the rational branch is
    // already within 1.15e-9 relative out there.
    if x * x >= 1400.0 {
        return Ok(x);
    }
    let e = std_normal_cdf(x) - u;
    let t = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    let polished = x - t / (1.0 + 0.5 * x * t);
    Ok(if polished.is_finite() { polished } else { x })
}

fn rational_tail(q: f64) -> f64 {
    (((((NQ_C[0] * q + NQ_C[1]) * q + NQ_C[2]) * q + NQ_C[3]) * q + NQ_C[4]) * q + NQ_C[5])
        / ((((NQ_D[0] * q + NQ_D[1]) * q + NQ_D[2]) * q + NQ_D[3]) * q + 1.0)
}

/// Quantile extended to the closed interval: 0 maps to -inf, 1 to +inf.
pub fn std_normal_quantile_extended(u: f64) -> f64 {
    if u <= 0.0 {
        f64::NEG_INFINITY
    } else if u >= 1.0 {
        f64::INFINITY
    } else {
        std_normal_quantile(u).expect("interior u")
    }
}

// ---------------------------------------------------------------------------
// Bessel J0
// ---------------------------------------------------------------------------

/// Zero-order Bessel function of the first kind.
///
/// Power series below |x| = 9; for 9 <= |x| <= 500 the periodized
/// trapezoid rule on (1/pi) *integral of* cos(x sin t) over [0, pi], whose
/// aliasing error drops below 1e-20 once the point count exceeds
/// |x|/2 + 25; the Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 9.0 {
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else if ax <= 500.0 {
        // Aliasing error is a pair of Bessel terms of order 2N, which fall
        // off the x ~ nu transition once 2N - x exceeds ~12 x^(1/3).
        let n = (0.5 * (ax + 12.0 * ax.cbrt() + 50.0)).ceil() as usize;
        let mut sum = 1.0; // half-weight endpoints: f(0) = f(pi) = 1
        for j in 1..n {
            sum += (ax * (PI * j as f64 / n as f64).sin()).cos();
        }
        sum / n as f64
    } else {
        // Hankel expansion, truncation error < 1e-16 for x > 500.
        let inv = 1.0 / ax;
        let inv2 = inv * inv;
        let p = 1.0 + inv2 * (-9.0 / 128.0 + inv2 * (3675.0 / 32768.0 - inv2 * 2401245.0 / 4194304.0));
        let q = inv * (-0.125 + inv2 * (75.0 / 1024.0 - inv2 * 59535.0 / 262144.0));
        let omega = ax - std::f64::consts::FRAC_PI_4;
        (2.0 / (PI * ax)).sqrt() * (p * omega.cos() - q * omega.sin())
    }
}

// ---------------------------------------------------------------------------
// Regularized lower incomplete gamma and friends
// ---------------------------------------------------------------------------

/// Natural log of the gamma function (Lanczos, g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        return PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEF.iter().enumerate() {
        acc += c / (z + (i + 1) as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
///
/// Series for x < a + 1, Lentz continued fraction otherwise.
pub fn reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(SpecFunError::Domain);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let prefix = (-x + a * x.ln() - ln_gamma(a)).exp();
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..600 {
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                return Ok((prefix * sum).clamp(0.0, 1.0));
            }
        }
        Err(SpecFunError::NoConvergence)
    } else {
        // Continued fraction for Q(a, x), modified Lentz.
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..600 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok((1.0 - prefix * h).clamp(0.0, 1.0));
            }
        }
        Err(SpecFunError::NoConvergence)
    }
}

/// Inverse of `reg_lower_inc_gamma` in its second argument: the x with
/// P(a, x) = p, for p in [0, 1).
///
/// Wilson-Hilferty (a > 1) or the small-a split of Numerical-Recipes
/// vintage seeds a Newton iteration that is kept inside a maintained
/// bracket; bisection takes over whenever Newton steps out.
pub fn inv_reg_lower_inc_gamma(a: f64, p: f64) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(0.0..1.0).contains(&p) {
        return Err(SpecFunError::Domain);
    }
    if p == 0.0 {
        return Ok(0.0);
    }

    let mut x = if a > 1.0 {
        let z = std_normal_quantile(p)?;
        let g = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt());
        (a * g * g * g).max(1e-300)
    } else {
        let t = 1.0 - a * (0.253 + 0.12 * a);
        if p < t {
            (p / t).powf(1.0 / a)
        } else {
            1.0 - (1.0 - (p - t) / (1.0 - t)).ln()
        }
    };

    let mut lo = 0.0_f64;
    let mut hi = (2.0 * x).max(a + 10.0);
    while reg_lower_inc_gamma(a, hi)? < p {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(SpecFunError::NoConvergence);
        }
    }
    x = x.clamp(lo + 1e-300, hi);

    let ln_gamma_a = ln_gamma(a);
    for _ in 0..100 {
        let f = reg_lower_inc_gamma(a, x)? - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if f.abs() < 1e-15 {
            break;
        }
        let ln_df = (a - 1.0) * x.ln() - x - ln_gamma_a;
        let next = if ln_df > -700.0 {
            x - f / ln_df.exp()
        } else {
            f64::NAN
        };
        x = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * x.max(1e-300) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // ----- independent oracles (implementation-free routes) -----

    /// Adaptive Simpson quadrature.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
        }
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            whole: f64,
            m: f64,
            fm: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (left, lm, flm) = simpson(f, a, fa, m, fm);
            let (right, rm, frm) = simpson(f, m, fm, b, fb);
            let delta = (left + right - whole).abs();
            // the 1e-17 floor keeps the recursion from chasing roundoff in
            // flat exponential tails
            if depth == 0 || delta <= 15.0 * tol || delta <= 1e-17 {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                    + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, m, fm) = simpson(f, a, fa, b, fb);
        rec(f, a, fa, b, fb, whole, m, fm, tol, 48)
    }

    /// erf by quadrature of its defining integral.
    fn erf_oracle(x: f64) -> f64 {
        let c = 2.0 / PI.sqrt();
        c * adaptive_simpson(&|t: f64| (-t * t).exp(), 0.0, x, 1e-16)
    }

    /// J0 by its power series with generous term count (small |x| only).
    fn j0_series_oracle(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-22 {
                break;
            }
        }
        sum
    }

    /// Inverse of erf by bisection on the implementation-independent oracle.
    fn erfinv_bisect_oracle(p: f64) -> f64 {
        assert!(p >= 0.0);
        let (mut lo, mut hi) = (0.0_f64, 8.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if erf_oracle(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    // ----- erf / erfinv -----

    #[test]
    fn erf_at_zero_and_odd_symmetry() {
        assert_eq!(erf(0.0), 0.0);
        for &x in &[0.1, 0.3, 0.7, 1.3, 2.9, 4.4, 7.0] {
            assert_eq!(erf(-x), -erf(x));
            assert!(erf(x).abs() <= 1.0);
        }
        // strictly inside (-1, 1) wherever that is representable in f64
        // (erf saturates to 1.0 at the ~5.9 rounding boundary)
        for &x in &[0.1, 1.3, 2.9, 4.4, 5.8] {
            assert!(erf(x) < 1.0);
        }
    }

    #[test]
    fn erf_matches_quadrature_oracle() {
        // oracle at x = 1 gives 0.8427007929497149 (frozen)
        assert!((erf_oracle(1.0) - 0.8427007929497149).abs() < 1e-13);
        let mut x = -6.0;
        while x <= 6.0 {
            let want = if x >= 0.0 {
                erf_oracle(x)
            } else {
                -erf_oracle(-x)
            };
            assert!(
                (erf(x) - want).abs() <= 1e-14,
                "erf({x}) = {} vs oracle {}",
                erf(x),
                want
            );
            x += 0.173;
        }
        assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-14);
    }

    #[test]
    fn erf_strictly_increasing() {
        // strict on the representable range, non-decreasing past saturation
        let mut prev = erf(-5.8);
        let mut x = -5.7;
        while x < 5.8 {
            let cur = erf(x);
            assert!(cur > prev, "not increasing at {x}");
            prev = cur;
            x += 0.1;
        }
        assert!(erf(6.5) >= erf(5.8) && erf(8.0) >= erf(6.5));
    }

    #[test]
    fn erfc_complements_erf() {
        for &x in &[-5.0, -1.2, -0.3, 0.0, 0.4, 1.7, 3.2, 6.5, 10.0] {
            assert!((erfc(x) + erf(x) - 1.0).abs() < 1e-14);
        }
        // deep tail keeps relative accuracy (vs scaled asymptotic sanity)
        assert!(erfc(10.0) > 0.0 && erfc(10.0) < 3e-45);
    }

    #[test]
    fn erfinv_round_trips() {
        // frozen from the bisection oracle: erfinv(0.8427007929) ~ 1.0
        assert!((erfinv_bisect_oracle(0.8427007929497149) - 1.0).abs() < 1e-10);
        assert!((erfinv(0.8427007929497149).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(erfinv(0.0).unwrap(), 0.0);

        // Rounding erf(x) to the f64 grid already perturbs the preimage by
        // ulp(1)/erf'(x), so the inverse cannot beat that amplification;
        // below |x| ~ 3.8 it is under 1e-10.
        let mut x = -4.99;
        while x <= 5.0 {
            let p = erf(x);
            let back = erfinv(p).unwrap();
            let grid_limit = 1.2e-16 / (FRAC_1_SQRT_PI * 2.0 * (-x * x).exp());
            let tol = 1e-10_f64.max(3.0 * grid_limit);
            assert!(
                (back - x).abs() < tol,
                "round trip at x={x}: {back} (tol {tol})"
            );
            if x.abs() < 3.8 {
                assert!((back - x).abs() < 1e-10, "strict round trip at x={x}");
            }
            x += 0.1093;
        }
    }

    #[test]
    fn erfinv_near_one_round_trips() {
        let z = erfinv(0.999999).unwrap();
        assert!(z.is_finite() && z > 0.0);
        assert!((erf(z) - 0.999999).abs() < 1e-10 * 0.999999);
        // extreme but representable targets
        for &p in &[0.999_999_999_9, 1.0 - 1e-13, 1.0 - 3e-16] {
            let z = erfinv(p).unwrap();
            assert!(z.is_finite());
            assert!((erfc(z) - (1.0 - p)).abs() <= 1e-12 * (1.0 - p).max(1e-300));
        }
    }

    #[test]
    fn erfinv_domain_errors() {
        assert_eq!(erfinv(1.0), Err(SpecFunError::Domain));
        assert_eq!(erfinv(-1.0), Err(SpecFunError::Domain));
        assert_eq!(erfinv(1.7), Err(SpecFunError::Domain));
        assert_eq!(erfinv(f64::NAN), Err(SpecFunError::Domain));
    }

    // ----- standard normal -----

    #[test]
    fn normal_quantile_median_and_symmetry() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        for &u in &[0.01, 0.2, 0.31, 0.45] {
            let a = std_normal_quantile(u).unwrap();
            let b = std_normal_quantile(1.0 - u).unwrap();
            assert!((a + b).abs() < 1e-12, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn normal_quantile_975() {
        // frozen from the bisection oracle on erf
        let want = std::f64::consts::SQRT_2 * erfinv_bisect_oracle(2.0 * 0.975 - 1.0);
        assert!((want - 1.959963984540054).abs() < 1e-9);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn normal_quantile_round_trips_with_cdf() {
        let mut x = -5.0;
        while x <= 5.0 {
            let u = std_normal_cdf(x);
            let back = std_normal_quantile(u).unwrap();
            assert!((back - x).abs() < 1e-10, "x={x} back={back}");
            x += 0.137;
        }
    }

    #[test]
    fn normal_quantile_monotone_and_edges() {
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert_eq!(std_normal_quantile_extended(0.0), f64::NEG_INFINITY);
        assert_eq!(std_normal_quantile_extended(1.0), f64::INFINITY);
        // denormal-adjacent interior values still work
        let z = std_normal_quantile(1e-300).unwrap();
        assert!(z < -37.0 && z.is_finite());
        let mut prev = f64::NEG_INFINITY;
        let mut u = 0.001;
        while u < 1.0 {
            let q = std_normal_quantile(u).unwrap();
            assert!(q > prev);
            prev = q;
            u += 0.013;
        }
    }

    // ----- Bessel J0 -----

    #[test]
    fn j0_basics() {
        assert_eq!(bessel_j0(0.0), 1.0);
        for &x in &[0.5, 2.0, 7.7, 15.0, 42.0] {
            assert_eq!(bessel_j0(-x), bessel_j0(x));
            assert!(bessel_j0(x).abs() <= 1.0);
        }
    }

    #[test]
    fn j0_matches_series_oracle_small() {
        let mut x = 0.0;
        while x <= 12.0 {
            let want = j0_series_oracle(x);
            assert!(
                (bessel_j0(x) - want).abs() < 1e-12,
                "J0({x}) = {} vs series {}",
                bessel_j0(x),
                want
            );
            x += 0.2347;
        }
        assert!((bessel_j0(PI) - (-0.3042421776440939)).abs() < 1e-12);
    }

    #[test]
    fn j0_first_three_zeros() {
        // located by bisection on the implementation, cross-checked against
        // series-oracle signs and the classical values
        let known = [2.404825557695773, 5.520078110286311, 8.653727912911013];
        for (bracket, want) in [(2.0, 3.0), (5.0, 6.0), (8.0, 9.0)].iter().zip(known) {
            let (mut lo, mut hi) = *bracket;
            assert!(bessel_j0(lo) * bessel_j0(hi) < 0.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if bessel_j0(lo) * bessel_j0(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let zero = 0.5 * (lo + hi);
            assert!((zero - want).abs() < 1e-5, "zero at {zero}, want {want}");
            assert!(j0_series_oracle(want).abs() < 1e-12);
        }
    }

    #[test]
    fn j0_branch_seams_agree() {
        // series / trapezoid seam at 9
        for &x in &[8.999, 9.0, 9.001] {
            assert!((bessel_j0(x) - j0_series_oracle(x)).abs() < 1e-11);
        }
        // spot values across the spec'd range [0, 100] vs an independent
        // over-resolved trapezoid
        for &x in &[20.0_f64, 55.5, 99.7] {
            let n = x.ceil() as usize + 80;
            let mut sum = 1.0;
            for j in 1..n {
                sum += (x * (PI * j as f64 / n as f64).sin()).cos();
            }
            assert!((bessel_j0(x) - sum / n as f64).abs() < 1e-13);
        }
        // around and beyond the trapezoid / asymptotic seam at 500
        // (references from an independent double-precision Bessel library)
        for (x, want) in [
            (500.0, -0.03410055688073173),
            (501.5, -0.012873246993076964),
            (1000.0, 0.02478668615242003),
            (123.456, -0.07103006241837068),
        ] {
            assert!(
                (bessel_j0(x) - want).abs() < 1e-12,
                "J0({x}) = {} vs {want}",
                bessel_j0(x)
            );
        }
    }

    // ----- incomplete gamma -----

    #[test]
    fn gamma_p_exponential_special_case() {
        for &x in &[0.0_f64, 0.05, 0.7, 1.0, 2.0, 9.0, 40.0] {
            let want = 1.0 - (-x).exp();
            assert!((reg_lower_inc_gamma(1.0, x).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_p_at_zero_and_domain() {
        assert_eq!(reg_lower_inc_gamma(2.5, 0.0).unwrap(), 0.0);
        assert_eq!(reg_lower_inc_gamma(0.0, 1.0), Err(SpecFunError::Domain));
        assert_eq!(reg_lower_inc_gamma(-1.0, 1.0), Err(SpecFunError::Domain));
        assert_eq!(reg_lower_inc_gamma(1.0, -0.5), Err(SpecFunError::Domain));
    }

    /// Lower incomplete gamma by quadrature; the substitution u = t^a
    /// removes the endpoint singularity when a < 1.
    fn lower_gamma_oracle(a: f64, x: f64) -> f64 {
        if a >= 1.0 {
            adaptive_simpson(&|t: f64| t.powf(a - 1.0) * (-t).exp(), 0.0, x, 1e-15)
        } else {
            adaptive_simpson(&|u: f64| (-u.powf(1.0 / a)).exp(), 0.0, x.powf(a), 1e-15) / a
        }
    }

    #[test]
    fn gamma_p_matches_quadrature_oracle() {
        // Gamma(3) = 2 exactly; integrand route is independent of the
        // series/continued-fraction implementation.
        let p33 = adaptive_simpson(&|t: f64| t * t * (-t).exp(), 0.0, 3.0, 1e-14) / 2.0;
        assert!((p33 - 0.5768099188731565).abs() < 1e-10);
        assert!((reg_lower_inc_gamma(3.0, 3.0).unwrap() - 0.5768099188731565).abs() < 1e-6);

        for &(a, x) in &[(0.5_f64, 0.3), (1.5, 2.0), (3.0, 1.0), (7.5, 9.0), (2.0, 25.0)] {
            let upper = (a + 40.0 * a.sqrt()).max(60.0);
            let want = lower_gamma_oracle(a, x) / lower_gamma_oracle(a, upper);
            let got = reg_lower_inc_gamma(a, x).unwrap();
            assert!((got - want).abs() < 1e-9, "P({a},{x}) = {got} vs {want}");
        }
    }

    #[test]
    fn gamma_p_monotone_in_x() {
        for &a in &[0.5, 1.0, 2.7, 8.0] {
            let mut prev = -1.0;
            let mut x = 0.0;
            while x < 30.0 {
                let v = reg_lower_inc_gamma(a, x).unwrap();
                assert!(v >= prev);
                assert!((0.0..=1.0).contains(&v));
                prev = v;
                x += 0.3;
            }
        }
    }

    #[test]
    fn inv_gamma_p_trivial_and_exponential() {
        assert_eq!(inv_reg_lower_inc_gamma(2.0, 0.0).unwrap(), 0.0);
        let p = 1.0 - (-2.0_f64).exp();
        assert!((inv_reg_lower_inc_gamma(1.0, p).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn inv_gamma_p_round_trips() {
        // forward function as the oracle
        let avals = [0.5, 0.9, 1.0, 1.7, 3.0, 12.5, 80.0];
        let pvals = [1e-8, 1e-4, 0.02, 0.3, 0.5, 0.77, 0.99, 0.999999];
        for &a in &avals {
            for &p in &pvals {
                let x = inv_reg_lower_inc_gamma(a, p).unwrap();
                let back = reg_lower_inc_gamma(a, x).unwrap();
                assert!(
                    (back - p).abs() < 1e-10,
                    "a={a} p={p}: x={x} round-trips to {back}"
                );
            }
        }
    }

    #[test]
    fn inv_gamma_p_domain_errors() {
        assert_eq!(inv_reg_lower_inc_gamma(1.0, 1.0), Err(SpecFunError::Domain));
        assert_eq!(inv_reg_lower_inc_gamma(1.0, -0.1), Err(SpecFunError::Domain));
        assert_eq!(inv_reg_lower_inc_gamma(0.0, 0.5), Err(SpecFunError::Domain));
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-13);
    }
}
