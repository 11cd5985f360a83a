//! Probability distributions used by the evidence engines.
//!
//! Every law exposes log-density, CDF and survival function; the survival
//! function is computed directly (never as `1 − cdf`) so that far upper tails
//! keep their relative precision.

use std::f64::consts::SQRT_2;

use super::special::{
    beta_tails, beta_tails_split, ln_beta, normal_tails, ln_gamma, regularized_gamma_lower,
    regularized_gamma_upper,
};
use crate::error::{EbfError, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A univariate continuous law.
pub trait Continuous {
    fn ln_pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn sf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }

    fn ln_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }
}

// ---------------------------------------------------------------------------
// Standard normal

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    normal_ln_pdf(z).exp()
}

#[inline]
pub fn normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF `Φ(z)`.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    normal_tails(z).0
}

/// Standard normal survival function `1 − Φ(z)`.
#[inline]
pub fn normal_sf(z: f64) -> f64 {
    normal_tails(z).1
}

/// `log Φ(z)`, finite for every finite `z`.
///
/// Below `z = −37` the direct tail underflows; there the asymptotic series
/// `log φ(z) − log(−z) + log(1 − 1/z² + 3/z⁴ − …)` is used.
pub fn normal_ln_cdf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z < -37.0 {
        let z2 = z * z;
        let inv = 1.0 / z2;
        // 1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8
        let series = 1.0 - inv * (1.0 - inv * (3.0 - inv * (15.0 - 105.0 * inv)));
        normal_ln_pdf(z) - (-z).ln() + series.ln()
    } else if z < 5.0 {
        normal_cdf(z).ln()
    } else {
        (-normal_sf(z)).ln_1p()
    }
}

/// `log(1 − Φ(z))`.
#[inline]
pub fn normal_ln_sf(z: f64) -> f64 {
    normal_ln_cdf(-z)
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EbfError::domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    // Start from the erfc inverse, then polish with Newton steps on the
    // tail that holds p so the inversion error stays relative.
    let mut x = -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
    for _ in 0..2 {
        let (err, dens) = if p < 0.5 {
            (normal_cdf(x) - p, normal_pdf(x))
        } else {
            ((1.0 - p) - normal_sf(x), normal_pdf(x))
        };
        if dens <= 0.0 || !dens.is_finite() {
            break;
        }
        let step = err / dens;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(x)
}

/// Normal law with mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
            return Err(EbfError::domain(format!(
                "normal requires finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(Normal { mean, sd })
    }

    #[inline]
    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

impl Continuous for Normal {
    fn ln_pdf(&self, x: f64) -> f64 {
        normal_ln_pdf(self.z(x)) - self.sd.ln()
    }
    fn cdf(&self, x: f64) -> f64 {
        normal_cdf(self.z(x))
    }
    fn sf(&self, x: f64) -> f64 {
        normal_sf(self.z(x))
    }
    fn ln_cdf(&self, x: f64) -> f64 {
        normal_ln_cdf(self.z(x))
    }
    fn ln_sf(&self, x: f64) -> f64 {
        normal_ln_sf(self.z(x))
    }
}

// ---------------------------------------------------------------------------
// Student t

/// Location-scale Student t law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    pub df: f64,
    pub location: f64,
    pub scale: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(df: f64, location: f64, scale: f64) -> Result<Self> {
        if !(df > 0.0) || !(scale > 0.0) || !location.is_finite() || !scale.is_finite() {
            return Err(EbfError::domain(format!(
                "t requires df > 0 and scale > 0, got df={df}, scale={scale}"
            )));
        }
        // log Γ((ν+1)/2) − log Γ(ν/2) − ½ log(νπ) − log s
        let ln_norm = if df.is_infinite() {
            -LN_SQRT_2PI
        } else {
            -ln_beta(0.5 * df, 0.5) - 0.5 * df.ln()
        };
        Ok(StudentT { df, location, scale, ln_norm: ln_norm - scale.ln() })
    }

    pub fn standard(df: f64) -> Result<Self> {
        Self::new(df, 0.0, 1.0)
    }

    #[inline]
    fn t(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }

    /// Lower tail of the standard t at `t ≤ 0`, i.e. `½ I_{ν/(ν+t²)}(ν/2, ½)`.
    fn lower_tail(&self, t: f64) -> f64 {
        if self.df.is_infinite() {
            return normal_cdf(t);
        }
        let t2 = t * t;
        let denom = self.df + t2;
        let tails = beta_tails_split(self.df / denom, t2 / denom, 0.5 * self.df, 0.5);
        0.5 * tails.lower
    }
}

impl Continuous for StudentT {
    fn ln_pdf(&self, x: f64) -> f64 {
        let t = self.t(x);
        if self.df.is_infinite() {
            return self.ln_norm - 0.5 * t * t;
        }
        self.ln_norm - 0.5 * (self.df + 1.0) * (t * t / self.df).ln_1p()
    }
    fn cdf(&self, x: f64) -> f64 {
        let t = self.t(x);
        if t <= 0.0 {
            self.lower_tail(t)
        } else {
            1.0 - self.lower_tail(-t)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        let t = self.t(x);
        if t >= 0.0 {
            self.lower_tail(-t)
        } else {
            1.0 - self.lower_tail(t)
        }
    }
}

/// Standard t density.
pub fn t_pdf(t: f64, df: f64) -> Result<f64> {
    Ok(StudentT::standard(df)?.pdf(t))
}

/// Standard t CDF.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    Ok(StudentT::standard(df)?.cdf(t))
}

// ---------------------------------------------------------------------------
// Fisher F

/// Snedecor F law with `(df1, df2)` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherF {
    pub df1: f64,
    pub df2: f64,
    ln_norm: f64,
}

impl FisherF {
    pub fn new(df1: f64, df2: f64) -> Result<Self> {
        if !(df1 > 0.0 && df2 > 0.0) || !df1.is_finite() || !df2.is_finite() {
            return Err(EbfError::domain(format!(
                "F requires df1, df2 > 0, got ({df1}, {df2})"
            )));
        }
        let ln_norm = 0.5 * (df1 * df1.ln() + df2 * df2.ln()) - ln_beta(0.5 * df1, 0.5 * df2);
        Ok(FisherF { df1, df2, ln_norm })
    }

    /// Log-density of `V = log X` at `v`, i.e. `v + log f(e^v)`, evaluated
    /// without overflow for large `|v|`.
    pub fn ln_pdf_log_scale(&self, v: f64) -> f64 {
        let (a, b) = (self.df1, self.df2);
        // log(a e^v + b) computed stably
        let ln_mix = if v > 0.0 {
            v + a.ln() + (b / a * (-v).exp()).ln_1p()
        } else {
            b.ln() + (a / b * v.exp()).ln_1p()
        };
        self.ln_norm + 0.5 * a * v - 0.5 * (a + b) * ln_mix
    }

    fn split(&self, x: f64) -> (f64, f64) {
        let num = self.df1 * x;
        let denom = num + self.df2;
        (num / denom, self.df2 / denom)
    }
}

impl Continuous for FisherF {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return match self.df1.partial_cmp(&2.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.ln_norm - 0.5 * (self.df1 + self.df2) * self.df2.ln(),
                _ => f64::NEG_INFINITY,
            };
        }
        self.ln_pdf_log_scale(x.ln()) - x.ln()
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let (u, w) = self.split(x);
        beta_tails_split(u, w, 0.5 * self.df1, 0.5 * self.df2).lower
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        let (u, w) = self.split(x);
        beta_tails_split(u, w, 0.5 * self.df1, 0.5 * self.df2).upper
    }
}

/// F density at `x`.
pub fn f_pdf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    Ok(FisherF::new(df1, df2)?.pdf(x))
}

/// F CDF at `x`.
pub fn f_cdf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    Ok(FisherF::new(df1, df2)?.cdf(x))
}

// ---------------------------------------------------------------------------
// Beta

/// Beta law on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta {
    pub a: f64,
    pub b: f64,
    ln_b: f64,
}

impl Beta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(EbfError::domain(format!("Beta requires a, b > 0, got ({a}, {b})")));
        }
        Ok(Beta { a, b, ln_b: ln_beta(a, b) })
    }
}

impl Continuous for Beta {
    fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - self.ln_b
    }
    fn cdf(&self, x: f64) -> f64 {
        beta_tails(x.clamp(0.0, 1.0), self.a, self.b).lower
    }
    fn sf(&self, x: f64) -> f64 {
        beta_tails(x.clamp(0.0, 1.0), self.a, self.b).upper
    }
}

/// Beta density.
pub fn beta_pdf(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(Beta::new(a, b)?.pdf(x))
}

// ---------------------------------------------------------------------------
// Gamma and chi-squared

/// Gamma law with shape and rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma {
    pub shape: f64,
    pub rate: f64,
}

impl Gamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(EbfError::domain(format!(
                "Gamma requires shape, rate > 0, got ({shape}, {rate})"
            )));
        }
        Ok(Gamma { shape, rate })
    }
}

impl Continuous for Gamma {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() + (self.shape - 1.0) * x.ln() - self.rate * x - ln_gamma(self.shape)
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        regularized_gamma_lower(self.shape, self.rate * x).unwrap_or(f64::NAN)
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        regularized_gamma_upper(self.shape, self.rate * x).unwrap_or(f64::NAN)
    }
}

/// Gamma density with shape and rate.
pub fn gamma_pdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    Ok(Gamma::new(shape, rate)?.pdf(x))
}

/// Central chi-squared law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquared {
    pub df: f64,
    inner: Gamma,
}

impl ChiSquared {
    pub fn new(df: f64) -> Result<Self> {
        if !(df > 0.0) || !df.is_finite() {
            return Err(EbfError::domain(format!("chi-squared requires df > 0, got {df}")));
        }
        Ok(ChiSquared { df, inner: Gamma { shape: 0.5 * df, rate: 0.5 } })
    }
}

impl Continuous for ChiSquared {
    fn ln_pdf(&self, x: f64) -> f64 {
        self.inner.ln_pdf(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.inner.sf(x)
    }
}

/// Chi-squared CDF.
pub fn chi2_cdf(x: f64, df: f64) -> Result<f64> {
    Ok(ChiSquared::new(df)?.cdf(x))
}

/// Chi-squared survival function.
pub fn chi2_sf(x: f64, df: f64) -> Result<f64> {
    Ok(ChiSquared::new(df)?.sf(x))
}

/// Noncentral chi-squared law, evaluated as a Poisson(λ/2) mixture of central
/// laws `χ²_{k+2j}`. The series is cut once the remaining Poisson mass is
/// below [`NONCENTRAL_TAIL_MASS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChiSquared {
    pub df: f64,
    pub ncp: f64,
}

/// Poisson tail mass at which the noncentral mixture series is truncated.
pub const NONCENTRAL_TAIL_MASS: f64 = 1e-12;

impl NoncentralChiSquared {
    pub fn new(df: f64, ncp: f64) -> Result<Self> {
        if !(df > 0.0) || !df.is_finite() || !(ncp >= 0.0) || !ncp.is_finite() {
            return Err(EbfError::domain(format!(
                "noncentral chi-squared requires df > 0 and ncp >= 0, got ({df}, {ncp})"
            )));
        }
        Ok(NoncentralChiSquared { df, ncp })
    }

    /// Sum `Σ_j w_j g(k + 2j)` over Poisson weights, stopping at the tail cut.
    fn mixture(&self, g: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * self.ncp;
        if half == 0.0 {
            return g(self.df);
        }
        let ln_half = half.ln();
        let mut acc = 0.0;
        let mut mass = 0.0;
        // Hard stop well beyond the Poisson bulk in case rounding keeps the
        // accumulated mass a hair short of 1 − tail.
        let hard_stop = (half + 60.0 * half.sqrt() + 200.0) as usize;
        for j in 0..=hard_stop {
            let jf = j as f64;
            let w = (-half + jf * ln_half - ln_gamma(jf + 1.0)).exp();
            mass += w;
            acc += w * g(self.df + 2.0 * jf);
            if jf > half && 1.0 - mass <= NONCENTRAL_TAIL_MASS {
                break;
            }
        }
        acc
    }
}

impl Continuous for NoncentralChiSquared {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        self.mixture(|k| Gamma { shape: 0.5 * k, rate: 0.5 }.pdf(x)).ln()
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.mixture(|k| Gamma { shape: 0.5 * k, rate: 0.5 }.cdf(x)).min(1.0)
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.mixture(|k| Gamma { shape: 0.5 * k, rate: 0.5 }.sf(x)).min(1.0)
    }
}

/// Noncentral chi-squared CDF.
pub fn noncentral_chi2_cdf(x: f64, df: f64, ncp: f64) -> Result<f64> {
    Ok(NoncentralChiSquared::new(df, ncp)?.cdf(x))
}
