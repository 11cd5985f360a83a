//! Closed-form EBFs for normal-theory tests.
//!
//! Every engine works on the standardized scale `z = x/σ`; σ cancels from
//! each EBF, so reports never carry it. With a flat prior the posterior for
//! θ given `z` is `N(z, 1)` and the posterior marginal likelihood of a
//! composite region H is
//!
//! `M_H(z) = φ(0; 0, 2) · P_{N(z, ½)}(H) / P_{N(z, 1)}(H)`.

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{EbfError, Result};
use crate::evidence::{BiasValue, EvidenceReport, Family, LogMarginal};
use crate::numerics::dist::{normal_ln_cdf, normal_ln_pdf, Normal};
use crate::region::HypothesisRegion;

/// Expected bias of the full-line normal marginal, half the dimension.
pub const NORMAL_FULL_BIAS: f64 = 0.5;

/// `log φ(0; 0, 2) = −½ log(4π)`.
const LN_CONV_AT_ZERO: f64 = -1.265_512_123_484_645_4;

/// Expected bias `(d₁ + 2d₂)/4` for `d₁` one-sided and `d₂` two-sided
/// components.
pub fn bias_normal(d1: u32, d2: u32) -> Result<BiasValue> {
    if d1 == 0 && d2 == 0 {
        return Err(EbfError::domain("at least one component is required"));
    }
    Ok(BiasValue::closed_form((d1 as f64 + 2.0 * d2 as f64) / 4.0))
}

/// Region-rule bias for the normal family.
pub fn normal_region_bias(region: &HypothesisRegion) -> BiasValue {
    BiasValue::closed_form(NORMAL_FULL_BIAS).scaled(region.location_bias_fraction())
}

/// Uncorrected log posterior marginal likelihood on the standardized scale.
///
/// A point region returns the log likelihood `log φ(z − θ₀)`.
pub fn normal_log_marginal(z: f64, region: &HypothesisRegion) -> Result<LogMarginal> {
    check_finite(z, "z")?;
    region.validate()?;
    let log_value = match *region {
        HypothesisRegion::Point { value } => normal_ln_pdf(z - value),
        HypothesisRegion::Full => LN_CONV_AT_ZERO,
        _ => {
            let num = region.ln_mass(&Normal { mean: z, sd: std::f64::consts::FRAC_1_SQRT_2 })?;
            let den = region.ln_mass(&Normal { mean: z, sd: 1.0 })?;
            LN_CONV_AT_ZERO + num - den
        }
    };
    Ok(LogMarginal::uncorrected(log_value, Family::Normal, *region))
}

/// Posterior marginal likelihood for an estimate `x` with standard error
/// `σ`, with the region given on the original mean scale.
pub fn normal_posterior_marginal(x: f64, sigma: f64, region: &HypothesisRegion) -> Result<LogMarginal> {
    check_sigma(sigma)?;
    check_finite(x, "x")?;
    let std_region = region.standardize(0.0, sigma);
    let mut m = normal_log_marginal(x / sigma, &std_region)?;
    m.region = *region;
    Ok(m)
}

fn corrected(z: f64, region: &HypothesisRegion, bias: BiasValue) -> Result<LogMarginal> {
    normal_log_marginal(z, region)?.correct(bias)
}

fn report(m0: LogMarginal, m1: LogMarginal, family: Family) -> Result<EvidenceReport> {
    let bias_h0 = m0.bias.unwrap_or_else(BiasValue::zero);
    let bias_h1 = m1.bias.unwrap_or_else(BiasValue::zero);
    Ok(EvidenceReport::from_log_ebf01(
        m0.log_value - m1.log_value,
        family,
        m0.region,
        m1.region,
        bias_h0,
        bias_h1,
    ))
}

/// Point null `θ = 0` against the full line:
/// `EBF₀₁ = √2·exp(−½(z² − 1))`.
pub fn ebf_two_sided(z: f64) -> Result<EvidenceReport> {
    check_finite(z, "z")?;
    let h0 = HypothesisRegion::Point { value: 0.0 };
    let h1 = HypothesisRegion::Full;
    report(corrected(z, &h0, BiasValue::zero())?, corrected(z, &h1, normal_region_bias(&h1))?, Family::Normal)
}

/// Point null against `θ > 0`.
///
/// When negative values are possible the half-line takes a quarter nat of
/// bias, giving `[Φ(z)√2/Φ(z√2)]·exp(−½(z² − ½))`. When they are impossible
/// the half-line is the whole parameter space and takes the full half nat.
pub fn ebf_one_sided(z: f64, negative_possible: bool) -> Result<EvidenceReport> {
    check_finite(z, "z")?;
    let h0 = HypothesisRegion::Point { value: 0.0 };
    let h1 = HypothesisRegion::Above { bound: 0.0 };
    let bias = if negative_possible { NORMAL_FULL_BIAS / 2.0 } else { NORMAL_FULL_BIAS };
    report(
        corrected(z, &h0, BiasValue::zero())?,
        corrected(z, &h1, BiasValue::closed_form(bias))?,
        Family::Normal,
    )
}

/// `θ < 0` against `θ > 0`:
/// `EBF₀₁ = [Φ(−z√2)/Φ(z√2)]·[Φ(z)/Φ(−z)]`. The two quarter-nat biases
/// cancel.
pub fn ebf_directional(z: f64) -> Result<EvidenceReport> {
    check_finite(z, "z")?;
    let ln_ebf = normal_ln_cdf(-z * SQRT_2) - normal_ln_cdf(z * SQRT_2) + normal_ln_cdf(z) - normal_ln_cdf(-z);
    let quarter = BiasValue::closed_form(NORMAL_FULL_BIAS / 2.0);
    Ok(EvidenceReport::from_log_ebf01(
        ln_ebf,
        Family::Normal,
        HypothesisRegion::Below { bound: 0.0 },
        HypothesisRegion::Above { bound: 0.0 },
        quarter,
        quarter,
    ))
}

/// General region pair for an estimate `x` with standard error `σ`;
/// regions are on the mean scale and each takes its own region-rule bias.
pub fn ebf_interval(
    x: f64,
    sigma: f64,
    h0: &HypothesisRegion,
    h1: &HypothesisRegion,
) -> Result<EvidenceReport> {
    let m0 = normal_posterior_marginal(x, sigma, h0)?.correct(normal_region_bias(h0))?;
    let m1 = normal_posterior_marginal(x, sigma, h1)?.correct(normal_region_bias(h1))?;
    report(m0, m1, Family::Normal)
}

/// Multivariate point null against the full space with `z² = xᵀΣ⁻¹x`:
/// `EBF₀₁ = 2^{d/2}·exp(−½(z² − d))`.
pub fn ebf_chi_squared(z2: f64, d: u32) -> Result<EvidenceReport> {
    if !(z2 >= 0.0) || !z2.is_finite() {
        return Err(EbfError::domain(format!("z² must be finite and non-negative, got {z2}")));
    }
    if d == 0 {
        return Err(EbfError::domain("dimension d must be at least 1"));
    }
    let d = d as f64;
    let ln_ebf = 0.5 * d * LN_2 - 0.5 * (z2 - d);
    Ok(EvidenceReport::from_log_ebf01(
        ln_ebf,
        Family::ChiSquared,
        HypothesisRegion::Point { value: 0.0 },
        HypothesisRegion::Full,
        BiasValue::zero(),
        BiasValue::closed_form(0.5 * d),
    ))
}

/// Deviance-scale criterion `−2·ℓ̂ + d(1 + log 2)`; differences between
/// models are `−2 log EBF`.
pub fn deviance_criterion(max_log_likelihood: f64, d: u32) -> Result<f64> {
    if d == 0 {
        return Err(EbfError::domain("parameter count d must be at least 1"));
    }
    check_finite(max_log_likelihood, "max_log_likelihood")?;
    Ok(-2.0 * max_log_likelihood + d as f64 * (1.0 + LN_2))
}

/// The crossing point `z² = 1 + log 2` where the two-sided EBF equals 1.
pub fn two_sided_threshold_z2() -> f64 {
    1.0 + LN_2
}

pub(crate) fn check_finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(EbfError::domain(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(EbfError::domain(format!("standard error must be positive and finite, got {sigma}")))
    }
}
