//! Units of evidence, P-value calibration and comparator Bayes factors.
//!
//! One unit of evidence is a factor of `(√3+1)/(√3−1) = 2+√3`, the point
//! where the third derivative of the logistic function vanishes, so
//! `log(2+√3)` marks where posterior probability stops changing fastest
//! on the log-odds scale.

use roots::{find_root_brent, SimpleConvergency};
use serde::{Deserialize, Serialize};

use crate::error::{EbfError, Result};
use crate::evidence::{EVIDENCE_BASE, LN_EVIDENCE_BASE};
use crate::normal::{ebf_chi_squared, ebf_two_sided};
use crate::numerics::dist::{chi2_sf, normal_quantile};
use crate::pvalue::ebf_pvalue;

/// Root-finding tolerance on `z²`.
const ROOT_TOLERANCE: f64 = 1e-12;

/// A Bayes factor expressed on the base-`(2+√3)` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceUnits {
    pub units: f64,
    pub base: f64,
}

/// `log(bf10)/log(2+√3)`.
pub fn units_of_evidence(bf10: f64) -> Result<EvidenceUnits> {
    if !(bf10 > 0.0) || !bf10.is_finite() {
        return Err(EbfError::domain(format!("Bayes factor must be positive and finite, got {bf10}")));
    }
    Ok(EvidenceUnits { units: bf10.ln() / LN_EVIDENCE_BASE, base: EVIDENCE_BASE })
}

/// The Bayes factor worth `units` units of evidence.
pub fn bf10_for_units(units: f64) -> f64 {
    (units * LN_EVIDENCE_BASE).exp()
}

/// Third derivative of the logistic function `σ(x) = 1/(1+e^{−x})`,
/// `σ(1−σ)(1 − 6σ + 6σ²)`.
pub fn logistic_third_derivative(x: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s)
}

/// Returns `log(2+√3)` after checking that the logistic third derivative
/// vanishes there and at its mirror image.
pub fn logistic_boundary_check() -> Result<f64> {
    let x = LN_EVIDENCE_BASE;
    for v in [x, -x] {
        let d3 = logistic_third_derivative(v);
        if d3.abs() > 1e-12 {
            return Err(EbfError::Contract(format!("logistic third derivative at {v} is {d3:e}, not zero")));
        }
    }
    Ok(x)
}

/// Test families for P-value calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CalibrationFamily {
    /// Two-sided test of a normal mean.
    NormalTwoSided,
    /// χ² statistic with `df` degrees of freedom.
    ChiSquared { df: u32 },
    /// P-value alone, through the 10p rule.
    Nonparametric,
}

impl CalibrationFamily {
    fn df(&self) -> Option<u32> {
        match *self {
            CalibrationFamily::NormalTwoSided => Some(1),
            CalibrationFamily::ChiSquared { df } => Some(df),
            CalibrationFamily::Nonparametric => None,
        }
    }

    /// `log EBF₁₀` as a function of the χ² statistic.
    fn ln_bf10_of_z2(&self, z2: f64) -> Result<f64> {
        match *self {
            CalibrationFamily::NormalTwoSided => Ok(ebf_two_sided(z2.sqrt())?.ebf10_log),
            CalibrationFamily::ChiSquared { df } => Ok(ebf_chi_squared(z2, df)?.ebf10_log),
            CalibrationFamily::Nonparametric => Err(EbfError::Unsupported("no χ² statistic for the P-value family".into())),
        }
    }
}

/// The χ² statistic at which the family's EBF₁₀ equals `bf10`, found by
/// bracketed root-finding on the EBF engine.
pub fn z2_for_bf10(family: CalibrationFamily, bf10: f64) -> Result<f64> {
    let df = family.df().ok_or_else(|| EbfError::Unsupported("the P-value family has no χ² statistic".into()))?;
    if df == 0 {
        return Err(EbfError::domain("χ² degrees of freedom must be at least 1"));
    }
    if !(bf10 > 0.0) || !bf10.is_finite() {
        return Err(EbfError::domain(format!("Bayes factor must be positive and finite, got {bf10}")));
    }
    let target = bf10.ln();
    let g = |z2: f64| family.ln_bf10_of_z2(z2).map_or(f64::NAN, |v| v - target);
    let lo = 0.0;
    if g(lo) > 0.0 {
        return Err(EbfError::domain(format!("EBF₁₀ = {bf10} is below the family's minimum")));
    }
    let hi = df as f64 * (1.0 + std::f64::consts::LN_2) + 2.0 * target.abs() + 10.0;
    let mut conv = SimpleConvergency { eps: ROOT_TOLERANCE, max_iter: 500 };
    find_root_brent(lo, hi, g, &mut conv).map_err(|e| EbfError::NonConvergence {
        context: format!("calibration root for EBF₁₀ = {bf10}: {e}"),
        estimate: f64::NAN,
        tolerance: ROOT_TOLERANCE,
    })
}

/// P-value at which the family's EBF₁₀ reaches `units` units of evidence.
pub fn p_for_units(family: CalibrationFamily, units: f64) -> Result<f64> {
    if !(units > 0.0) || !units.is_finite() {
        return Err(EbfError::domain(format!("units must be positive and finite, got {units}")));
    }
    let bf10 = bf10_for_units(units);
    match family {
        CalibrationFamily::Nonparametric => Ok(1.0 / (10.0 * bf10)),
        _ => chi2_sf(z2_for_bf10(family, bf10)?, family.df().unwrap_or(1) as f64),
    }
}

/// One row of the P-value calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub units: f64,
    pub ebf10: f64,
    pub normal: f64,
    pub chi2_2: f64,
    pub chi2_3: f64,
    pub nonparametric: f64,
}

/// P-values reaching each of the given units for the standard families.
pub fn calibration_table(units: &[f64]) -> Result<Vec<CalibrationRow>> {
    units
        .iter()
        .map(|&u| {
            Ok(CalibrationRow {
                units: u,
                ebf10: bf10_for_units(u),
                normal: p_for_units(CalibrationFamily::NormalTwoSided, u)?,
                chi2_2: p_for_units(CalibrationFamily::ChiSquared { df: 2 }, u)?,
                chi2_3: p_for_units(CalibrationFamily::ChiSquared { df: 3 }, u)?,
                nonparametric: p_for_units(CalibrationFamily::Nonparametric, u)?,
            })
        })
        .collect()
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(EbfError::domain(format!("P-value must lie strictly between 0 and 1, got {p}")))
    }
}

/// Lower bound `−e p log p` on the Bayes factor for H₀, valid for `p < 1/e`.
pub fn sellke_bound(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    if p >= (-1.0f64).exp() {
        return Err(EbfError::domain(format!("the bound needs p < 1/e, got {p}")));
    }
    Ok(-std::f64::consts::E * p * p.ln())
}

/// Lower bound `−e(1−p) log(1−p)` on the Bayes factor for H₀.
pub fn held_ott_bound(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(-std::f64::consts::E * (1.0 - p) * (-p).ln_1p())
}

/// `exp(−½(z²+1))`.
pub fn brc(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(EbfError::domain(format!("z must be finite, got {z}")));
    }
    Ok((-0.5 * (z * z + 1.0)).exp())
}

/// Unit-information Bayes factor for H₀, `√(n+1)·exp(−½z²n/(n+1))`.
pub fn unit_information_bf(z: f64, n: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(EbfError::domain(format!("z must be finite, got {z}")));
    }
    if !(n >= 1.0) || !n.is_finite() {
        return Err(EbfError::domain(format!("sample size must be at least 1, got {n}")));
    }
    Ok((n + 1.0).sqrt() * (-0.5 * z * z * n / (n + 1.0)).exp())
}

/// One row of the P-value calibration curve. Every Bayes-factor column is
/// `−log₁₀` of a Bayes factor for H₀; the Sellke column is absent where
/// the bound is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: f64,
    pub neg_log10_p: f64,
    pub ebf_normal: f64,
    pub ebf_nonparametric: f64,
    pub sellke: Option<f64>,
    pub brc: f64,
}

/// Calibration curve for a two-sided normal test over a grid of P-values.
pub fn calibration_curve(grid: &[f64]) -> Result<Vec<CurveRow>> {
    let nl10 = |v: f64| -v.log10();
    grid.iter()
        .map(|&p| {
            check_open_unit(p)?;
            let z = -normal_quantile(0.5 * p)?;
            Ok(CurveRow {
                p,
                neg_log10_p: nl10(p),
                ebf_normal: -ebf_two_sided(z)?.ebf01_log / std::f64::consts::LN_10,
                ebf_nonparametric: -ebf_pvalue(p)?.ebf01_log / std::f64::consts::LN_10,
                sellke: sellke_bound(p).ok().map(nl10),
                brc: nl10(brc(z)?),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn units_anchor_values() {
        assert!((units_of_evidence(3.73).unwrap().units - 1.0).abs() < 0.001);
        assert_relative_eq!(units_of_evidence(2.0 + 3f64.sqrt()).unwrap().units, 1.0, epsilon = 1e-15);
        assert!((units_of_evidence(194.0).unwrap().units - 4.0).abs() < 0.01);
        assert_eq!(units_of_evidence(1.0).unwrap().units, 0.0);
        assert!(units_of_evidence(0.0).is_err());
    }

    #[test]
    fn boundary() {
        assert_relative_eq!(logistic_boundary_check().unwrap(), (2.0 + 3f64.sqrt()).ln(), epsilon = 1e-15);
        assert!(logistic_third_derivative(0.0).abs() > 0.1);
        for &x in &[0.3, 1.0, 2.5] {
            assert_relative_eq!(logistic_third_derivative(x), logistic_third_derivative(-x), epsilon = 1e-15);
        }
    }

    #[test]
    fn calibration_anchor_values() {
        assert!((p_for_units(CalibrationFamily::NormalTwoSided, 1.0).unwrap() - 0.038).abs() < 0.0005);
        assert!((p_for_units(CalibrationFamily::ChiSquared { df: 3 }, 3.0).unwrap() - 0.005).abs() < 0.0005);
        assert!((p_for_units(CalibrationFamily::Nonparametric, 2.0).unwrap() - 0.0072).abs() < 0.0001);
        assert!(p_for_units(CalibrationFamily::ChiSquared { df: 0 }, 1.0).is_err());
    }

    #[test]
    fn root_matches_closed_form() {
        for d in 1..6u32 {
            for &b in &[0.9, 2.0, 37.0, 1e4] {
                let want = d as f64 + 2.0 * (0.5 * d as f64 * std::f64::consts::LN_2 + f64::ln(b));
                assert_relative_eq!(z2_for_bf10(CalibrationFamily::ChiSquared { df: d }, b).unwrap(), want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn comparator_anchor_values() {
        assert!((1.0 / sellke_bound(0.05).unwrap() - 2.45).abs() < 0.01);
        assert!((1.0 / held_ott_bound(0.05).unwrap() - 7.55).abs() < 0.01);
        assert_relative_eq!(brc(0.0).unwrap(), (-0.5f64).exp(), epsilon = 1e-16);
        assert!(sellke_bound(0.4).is_err());
        assert_relative_eq!(unit_information_bf(0.0, 3.0).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn curve_row_at_five_percent() {
        let rows = calibration_curve(&[0.05]).unwrap();
        assert_eq!(rows.len(), 1);
        let r = rows[0];
        let want = -(2f64.sqrt() * (-0.5 * (1.959_963_984_540_054f64.powi(2) - 1.0)).exp()).log10();
        assert_relative_eq!(r.ebf_normal, want, epsilon = 1e-12);
        assert_relative_eq!(r.sellke.unwrap(), -sellke_bound(0.05).unwrap().log10(), epsilon = 1e-15);
    }

    #[test]
    fn curves_are_monotone() {
        let grid: Vec<f64> = (1..300).map(|i| 10f64.powf(-0.02 * i as f64)).collect();
        let rows = calibration_curve(&grid).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].ebf_normal >= w[0].ebf_normal);
            assert!(w[1].ebf_nonparametric >= w[0].ebf_nonparametric);
            assert!(w[1].brc >= w[0].brc);
            if let (Some(a), Some(b)) = (w[0].sellke, w[1].sellke) {
                assert!(b >= a);
            }
        }
    }

    proptest! {
        #[test]
        fn units_round_trip(u in -10.0f64..10.0) {
            prop_assert!((units_of_evidence(bf10_for_units(u)).unwrap().units - u).abs() < 1e-12);
        }

        #[test]
        fn bound_ordering(p in 1e-12f64..0.3678) {
            let h = held_ott_bound(p).unwrap();
            let s = sellke_bound(p).unwrap();
            prop_assert!(h <= s && s <= 1.0);
        }
    }
}
