//! Non-parametric EBFs from a P-value alone.
//!
//! Under H₀ the P-value is uniform. Under H₁ it follows `Beta(1, β)` with
//! `β > 1`, likelihood `β(1−p)^{β−1}`, and a flat prior on β gives a
//! `Gamma(2, ℓ)` posterior with `ℓ = −log(1−p)`. The posterior marginal
//! likelihood of `β > 1` then has the closed form
//!
//! `M(p) = (¼ + ℓ/2 + ℓ²/2) / (ℓ + ℓ²)`,
//!
//! which behaves like `1/(4p)` as `p → 0`. With the default bias `log(5/2)`
//! the EBF in favour of H₀ is `(5/2)/M(p) ≈ 10p` for small p.
//!
//! These EBFs are no more than an indicative measure of evidence: they use
//! nothing but the P-value and an assumed alternative family.

use crate::error::{EbfError, Result};
use crate::evidence::{make_report, BiasValue, EvidenceReport, Family, LogMarginal};
use crate::numerics::quad::{integrate_2d, Domain, QuadratureSpec};
use crate::region::HypothesisRegion;

/// Default bias `log(5/2)`, close to the exact value over a wide range of β.
pub const PVALUE_DEFAULT_BIAS: f64 = 0.916_290_731_874_155_1;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(EbfError::domain(format!("P-value must lie strictly between 0 and 1, got {p}")))
    }
}

/// `ℓ = −log(1−p)`, accurate down to subnormal p.
fn ell(p: f64) -> f64 {
    -(-p).ln_1p()
}

/// `log M` as a function of `ℓ > 0`.
fn ln_marginal_of_ell(l: f64) -> f64 {
    (0.25 + 0.5 * l * (1.0 + l)).ln() - l.ln() - l.ln_1p()
}

/// `log` of the replicate-prior marginal of `β > 1` at data `ℓ_p` when the
/// posterior comes from an independent P-value with `ℓ_q`:
/// `(1/k + 2/k² + 2/k³)/(1/ℓ_q + 1/ℓ_q²)` with `k = ℓ_p + ℓ_q`.
fn ln_replicate_marginal(lp: f64, lq: f64) -> f64 {
    let k = lp + lq;
    ((k * (k + 2.0) + 2.0).ln() - 3.0 * k.ln()) - (lq.ln_1p() - 2.0 * lq.ln())
}

/// The two defining integrals of the marginal,
/// `∫₁^∞ β²(1−p)^{2β−1} dβ` and `∫₁^∞ β(1−p)^β dβ`, in closed form.
pub fn pvalue_marginal_terms(p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    let l = ell(p);
    let q = 1.0 - p;
    let num = q * (0.25 / (l * l * l) + 0.5 / (l * l) + 0.5 / l);
    let den = q * (1.0 / (l * l) + 1.0 / l);
    Ok((num, den))
}

/// Uncorrected log posterior marginal likelihood of `β > 1`.
pub fn pvalue_posterior_marginal(p: f64) -> Result<LogMarginal> {
    check_p(p)?;
    Ok(LogMarginal::uncorrected(ln_marginal_of_ell(ell(p)), Family::PValue, h1_region()))
}

fn h0_region() -> HypothesisRegion {
    HypothesisRegion::Point { value: 1.0 }
}

fn h1_region() -> HypothesisRegion {
    HypothesisRegion::Above { bound: 1.0 }
}

/// Expected bias for a fixed β at the given tolerances.
///
/// With `p, q ~ Beta(1, β)` independently, `−log(1−p)` is exponential with
/// rate β, so the expectation becomes an integral over `(0,∞)²` against
/// `e^{−a−b}` with `ℓ_p = a/β` and `ℓ_q = b/β`.
pub fn pvalue_expected_bias_with(beta: f64, spec: &QuadratureSpec) -> Result<BiasValue> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(EbfError::domain(format!("β must be finite and above 1, got {beta}")));
    }
    let f = |a: f64, b: f64| {
        let w = (-a - b).exp();
        if a == 0.0 || b == 0.0 || w == 0.0 {
            return 0.0;
        }
        let (lp, lq) = (a / beta, b / beta);
        w * (ln_marginal_of_ell(lp) - ln_replicate_marginal(lp, lq))
    };
    let half_line = Domain::new(0.0, f64::INFINITY).with_scale(1.0);
    let r = integrate_2d(f, half_line, |_| half_line, spec);
    let value = r.require("P-value expected bias", spec)?;
    Ok(BiasValue::quadrature(value, r.error))
}

/// Expected bias for a fixed β.
pub fn pvalue_expected_bias(beta: f64) -> Result<BiasValue> {
    pvalue_expected_bias_with(beta, &QuadratureSpec::new(1e-9, 1e-8, 500)?)
}

/// EBF in favour of H₀ (uniform P-value) using the default bias.
pub fn ebf_pvalue(p: f64) -> Result<EvidenceReport> {
    let m1 = pvalue_posterior_marginal(p)?.correct(BiasValue::closed_form(PVALUE_DEFAULT_BIAS))?;
    let m0 = LogMarginal::uncorrected(0.0, Family::PValue, h0_region()).correct(BiasValue::zero())?;
    make_report(m0, m1)
}

/// The small-p approximation `EBF₀₁ ≈ 10p`.
pub fn ten_p_rule(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(10.0 * p)
}

/// Posterior probability of H₀ at the given prior odds `Pr(H₀)/Pr(H₁)`.
pub fn posterior_prob_h0(p: f64, prior_odds: f64) -> Result<f64> {
    if !(prior_odds > 0.0) || prior_odds.is_nan() {
        return Err(EbfError::domain(format!("prior odds must be positive, got {prior_odds}")));
    }
    let ebf01 = ebf_pvalue(p)?.ebf01;
    if prior_odds.is_infinite() {
        return Ok(1.0);
    }
    let odds = prior_odds * ebf01;
    Ok(odds / (1.0 + odds))
}
