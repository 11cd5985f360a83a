//! EBFs for a batch of normal estimates sharing one pair of hypotheses.
//!
//! Each test's posterior is replaced by a mixture of its own posterior and
//! the other tests' posteriors, weighted by `π_H`. For test i and a
//! composite region H the posterior marginal likelihood is
//!
//! `[e^{−b_H} ∫_H f(x_i|θ)π(θ|x_i)dθ + π_H Σ_{j≠i} ∫_H f(x_i|θ)π(θ|x_j)dθ]`
//! `/ [P(H|x_i) + π_H Σ_{j≠i} P(H|x_j)]`.
//!
//! Only the own term is bias-corrected; the cross terms use independent
//! data and are left alone. This adjustment is a heuristic, and its
//! behaviour is checked by simulation rather than derived.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EbfError, Result};
use crate::evidence::{make_report, BiasValue, EvidenceReport, Family, LogMarginal};
use crate::normal::{check_finite, check_sigma, normal_region_bias};
use crate::numerics::dist::{normal_ln_pdf, Normal};
use crate::numerics::special::log_sum_exp;
use crate::region::HypothesisRegion;

/// One test's summary statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub id: String,
    pub estimate: f64,
    pub se: f64,
}

/// An immutable batch of tests with a shared region pair and mixture weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTestBatch {
    pub tests: Vec<TestSummary>,
    pub pi_h: f64,
    pub h0: HypothesisRegion,
    pub h1: HypothesisRegion,
}

impl MultiTestBatch {
    pub fn new(tests: Vec<TestSummary>, pi_h: f64, h0: HypothesisRegion, h1: HypothesisRegion) -> Result<Self> {
        let b = MultiTestBatch { tests, pi_h, h0, h1 };
        b.validate()?;
        Ok(b)
    }

    /// Builds a batch with ids `0, 1, …` from parallel slices.
    pub fn from_slices(
        estimates: &[f64],
        ses: &[f64],
        pi_h: f64,
        h0: HypothesisRegion,
        h1: HypothesisRegion,
    ) -> Result<Self> {
        if estimates.len() != ses.len() {
            return Err(EbfError::domain("estimates and standard errors differ in length"));
        }
        let tests = estimates
            .iter()
            .zip(ses)
            .enumerate()
            .map(|(i, (&estimate, &se))| TestSummary { id: i.to_string(), estimate, se })
            .collect();
        Self::new(tests, pi_h, h0, h1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(EbfError::domain("a batch needs at least one test"));
        }
        if !(self.pi_h > 0.0 && self.pi_h <= 1.0) {
            return Err(EbfError::domain(format!("π_H must lie in (0, 1], got {}", self.pi_h)));
        }
        for t in &self.tests {
            check_finite(t.estimate, "estimate")?;
            check_sigma(t.se)?;
        }
        self.h0.validate()?;
        self.h1.validate()
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

/// `log ∫_H f(x_i|θ) π(θ|x_j) dθ` for normal likelihoods and flat-prior
/// posteriors, unnormalised by the posterior mass of H. On the full line
/// this is the density of `x_i` under `N(x_j, η_i² + η_j²)`.
pub fn cross_marginal(batch: &MultiTestBatch, i: usize, j: usize, region: &HypothesisRegion) -> Result<f64> {
    let (a, b) = pair(batch, i, j)?;
    cross_term(a, b, region)
}

fn pair(batch: &MultiTestBatch, i: usize, j: usize) -> Result<(&TestSummary, &TestSummary)> {
    let n = batch.tests.len();
    if i >= n || j >= n {
        return Err(EbfError::domain(format!("test index out of range for a batch of {n}")));
    }
    Ok((&batch.tests[i], &batch.tests[j]))
}

fn cross_term(a: &TestSummary, b: &TestSummary, region: &HypothesisRegion) -> Result<f64> {
    let (vi, vj) = (a.se * a.se, b.se * b.se);
    let total = vi + vj;
    let ln_density = normal_ln_pdf((a.estimate - b.estimate) / total.sqrt()) - 0.5 * total.ln();
    if matches!(region, HypothesisRegion::Full) {
        return Ok(ln_density);
    }
    let mean = (a.estimate * vj + b.estimate * vi) / total;
    let sd = (vi * vj / total).sqrt();
    Ok(ln_density + region.ln_mass(&Normal { mean, sd })?)
}

/// Unadjusted and adjusted log marginals for one test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiMarginal {
    /// Mixture marginal with no correction at all.
    pub unadjusted: f64,
    /// Mixture marginal with the own term bias-corrected.
    pub adjusted: f64,
}

/// Per-test pieces that do not depend on the test being scored.
struct Prepared {
    ln_pi: f64,
    /// `log P(H | x_j)` under the unrestricted posterior, `−∞` if it underflows.
    ln_post_mass: Vec<f64>,
    bias: f64,
}

fn prepare(batch: &MultiTestBatch, region: &HypothesisRegion) -> Prepared {
    let ln_post_mass = batch
        .tests
        .iter()
        .map(|t| region.ln_mass(&Normal { mean: t.estimate, sd: t.se }).unwrap_or(f64::NEG_INFINITY))
        .collect();
    Prepared { ln_pi: batch.pi_h.ln(), ln_post_mass, bias: normal_region_bias(region).value }
}

fn marginal_with(batch: &MultiTestBatch, i: usize, region: &HypothesisRegion, prep: &Prepared) -> Result<MultiMarginal> {
    let t = &batch.tests[i];
    if let HypothesisRegion::Point { value } = *region {
        let v = normal_ln_pdf((t.estimate - value) / t.se) - t.se.ln();
        return Ok(MultiMarginal { unadjusted: v, adjusted: v });
    }
    let own = cross_term(t, t, region)?;
    if prep.ln_post_mass[i] == f64::NEG_INFINITY {
        return Err(EbfError::degenerate(format!("region {region} has numerically zero posterior mass for test {}", t.id)));
    }
    let mut cross = Vec::with_capacity(batch.tests.len());
    let mut mass = Vec::with_capacity(batch.tests.len());
    for (j, other) in batch.tests.iter().enumerate() {
        if j == i {
            continue;
        }
        let c = match cross_term(t, other, region) {
            Ok(v) => v,
            Err(EbfError::DegenerateRegion(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        cross.push(prep.ln_pi + c);
        mass.push(prep.ln_pi + prep.ln_post_mass[j]);
    }
    let ln_den = log_sum_exp(std::iter::once(prep.ln_post_mass[i]).chain(mass));
    let unadjusted = log_sum_exp(std::iter::once(own).chain(cross.iter().copied())) - ln_den;
    let adjusted = log_sum_exp(std::iter::once(own - prep.bias).chain(cross)) - ln_den;
    Ok(MultiMarginal { unadjusted, adjusted })
}

/// Unadjusted and adjusted log marginals of `region` for every test, in
/// input order.
pub fn multi_log_marginals(batch: &MultiTestBatch, region: &HypothesisRegion) -> Result<Vec<MultiMarginal>> {
    batch.validate()?;
    region.validate()?;
    let prep = prepare(batch, region);
    (0..batch.len()).into_par_iter().map(|i| marginal_with(batch, i, region, &prep)).collect()
}

fn corrected(m: MultiMarginal, region: HypothesisRegion) -> Result<LogMarginal> {
    // The reported bias is whatever separates the unadjusted and adjusted
    // mixture marginals.
    LogMarginal::uncorrected(m.unadjusted, Family::MultiNormal, region)
        .correct(BiasValue::closed_form(m.unadjusted - m.adjusted))
}

/// One EBF per test, in input order. Output is independent of scheduling.
pub fn multi_ebf(batch: &MultiTestBatch) -> Result<Vec<EvidenceReport>> {
    let m0 = multi_log_marginals(batch, &batch.h0)?;
    let m1 = multi_log_marginals(batch, &batch.h1)?;
    m0.into_iter()
        .zip(m1)
        .map(|(a, b)| make_report(corrected(a, batch.h0)?, corrected(b, batch.h1)?))
        .collect()
}

/// A test's place in the evidence ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub id: String,
    pub ebf10_log: f64,
    /// 1 for the strongest evidence against H₀.
    pub rank: usize,
}

/// Tests sorted by decreasing evidence against H₀. The sort is stable, so
/// ties keep their input order.
pub fn ranked_summary(ids: &[String], reports: &[EvidenceReport]) -> Result<Vec<RankedRow>> {
    if ids.len() != reports.len() {
        return Err(EbfError::domain("ids and reports differ in length"));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| reports[b].ebf10_log.total_cmp(&reports[a].ebf10_log));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(r, i)| RankedRow { id: ids[i].clone(), ebf10_log: reports[i].ebf10_log, rank: r + 1 })
        .collect())
}
