//! Marginal likelihoods, bias values and the evidence report.

use serde::{Deserialize, Serialize};

use crate::error::{EbfError, Result};
use crate::region::HypothesisRegion;

/// Base of the evidence scale, `(√3+1)/(√3−1) = 2+√3`.
pub const EVIDENCE_BASE: f64 = 3.732_050_807_568_877_2;

/// `log(2+√3)`, the logistic boundary where the third derivative vanishes.
pub const LN_EVIDENCE_BASE: f64 = 1.316_957_896_924_816_7;

/// The test family a marginal or report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    ChiSquared,
    T,
    Binomial,
    NegativeBinomial,
    CountAverage,
    F,
    PValue,
    MultiNormal,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::ChiSquared => "chi_squared",
            Family::T => "t",
            Family::Binomial => "binomial",
            Family::NegativeBinomial => "negative_binomial",
            Family::CountAverage => "count_average",
            Family::F => "f",
            Family::PValue => "pvalue",
            Family::MultiNormal => "multi_normal",
        }
    }
}

/// How a bias value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    ExactSum,
    Quadrature,
}

/// Expected bias `E_X b_H(X)` in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasValue {
    pub value: f64,
    pub provenance: Provenance,
    /// Error estimate for quadrature (and extrapolated sums); `None` for
    /// closed forms.
    pub achieved_error: Option<f64>,
}

impl BiasValue {
    pub fn closed_form(value: f64) -> Self {
        BiasValue { value, provenance: Provenance::ClosedForm, achieved_error: None }
    }

    pub fn exact_sum(value: f64) -> Self {
        BiasValue { value, provenance: Provenance::ExactSum, achieved_error: None }
    }

    pub fn quadrature(value: f64, achieved_error: f64) -> Self {
        BiasValue { value, provenance: Provenance::Quadrature, achieved_error: Some(achieved_error) }
    }

    pub fn zero() -> Self {
        Self::closed_form(0.0)
    }

    /// The same bias scaled by a region fraction; a zero fraction becomes
    /// an exact closed-form zero.
    pub fn scaled(&self, fraction: f64) -> Self {
        if fraction == 0.0 {
            return Self::zero();
        }
        BiasValue {
            value: self.value * fraction,
            provenance: self.provenance,
            achieved_error: self.achieved_error.map(|e| e * fraction),
        }
    }
}

/// A posterior marginal likelihood `M_H(x)` held in log scale.
///
/// When `bias` is `Some`, `log_value` is already corrected, i.e. it equals
/// the raw log marginal minus the bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMarginal {
    pub log_value: f64,
    pub bias: Option<BiasValue>,
    pub family: Family,
    pub region: HypothesisRegion,
}

impl LogMarginal {
    pub fn uncorrected(log_value: f64, family: Family, region: HypothesisRegion) -> Self {
        LogMarginal { log_value, bias: None, family, region }
    }

    pub fn is_corrected(&self) -> bool {
        self.bias.is_some()
    }

    /// Bias subtracted so far, 0 for an uncorrected marginal.
    pub fn bias_applied(&self) -> f64 {
        self.bias.map_or(0.0, |b| b.value)
    }

    /// The log marginal before any correction.
    pub fn raw_log_value(&self) -> f64 {
        self.log_value + self.bias_applied()
    }

    /// Apply a bias correction. Correcting twice is a contract error.
    pub fn correct(self, bias: BiasValue) -> Result<Self> {
        if self.is_corrected() {
            return Err(EbfError::Contract("marginal is already bias-corrected".into()));
        }
        Ok(LogMarginal { log_value: self.log_value - bias.value, bias: Some(bias), ..self })
    }
}

/// The user-facing result of one comparison of `H₀` against `H₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub ebf01_log: f64,
    pub ebf10_log: f64,
    pub ebf01: f64,
    pub ebf10: f64,
    pub log10_ebf10: f64,
    /// Positive when the evidence favours `H₁`.
    pub units_of_evidence: f64,
    pub family: Family,
    pub h0: HypothesisRegion,
    pub h1: HypothesisRegion,
    pub bias_h0: BiasValue,
    pub bias_h1: BiasValue,
}

impl EvidenceReport {
    /// Build a report from a log EBF in favour of `H₀`.
    pub fn from_log_ebf01(
        ebf01_log: f64,
        family: Family,
        h0: HypothesisRegion,
        h1: HypothesisRegion,
        bias_h0: BiasValue,
        bias_h1: BiasValue,
    ) -> Self {
        let ebf10_log = -ebf01_log;
        EvidenceReport {
            ebf01_log,
            ebf10_log,
            ebf01: ebf01_log.exp(),
            ebf10: ebf10_log.exp(),
            log10_ebf10: ebf10_log / std::f64::consts::LN_10,
            units_of_evidence: ebf10_log / LN_EVIDENCE_BASE,
            family,
            h0,
            h1,
            bias_h0,
            bias_h1,
        }
    }

    /// The same comparison with the hypotheses exchanged.
    pub fn swapped(&self) -> Self {
        Self::from_log_ebf01(self.ebf10_log, self.family, self.h1, self.h0, self.bias_h1, self.bias_h0)
    }
}

/// Ratio of two bias-corrected marginals from the same data.
pub fn make_report(log_m0: LogMarginal, log_m1: LogMarginal) -> Result<EvidenceReport> {
    let (b0, b1) = match (log_m0.bias, log_m1.bias) {
        (Some(b0), Some(b1)) => (b0, b1),
        _ => {
            return Err(EbfError::Contract(
                "both marginals must be bias-corrected before forming an EBF".into(),
            ))
        }
    };
    if log_m0.family != log_m1.family {
        return Err(EbfError::Contract(format!(
            "marginals come from different families ({} vs {})",
            log_m0.family.as_str(),
            log_m1.family.as_str()
        )));
    }
    if !log_m0.log_value.is_finite() || !log_m1.log_value.is_finite() {
        return Err(EbfError::domain("marginal likelihoods must have finite logs"));
    }
    Ok(EvidenceReport::from_log_ebf01(
        log_m0.log_value - log_m1.log_value,
        log_m0.family,
        log_m0.region,
        log_m1.region,
        b0,
        b1,
    ))
}
