//! EBFs for binomial and negative-binomial counts under a `Beta(α, α)` prior.
//!
//! For a composite region H on the success probability the posterior
//! marginal likelihood is
//!
//! `M_H(x) = L · B(2x+α, 2(n−x)+α)/B(x+α, n−x+α) · P_{Beta(2x+α, 2(n−x)+α)}(H) / P_{Beta(x+α, n−x+α)}(H)`
//!
//! where `L` is the combinatorial factor of the sampling model, `C(n, x)`
//! for the binomial and `C(n−1, x−1)` for the negative binomial. The
//! expected bias sums `Pr(data, replicate)·[log M_H(data) − log M_H(data | replicate prior)]`
//! over the prior predictive of a data/replicate pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EbfError, Result};
use crate::evidence::{make_report, BiasValue, EvidenceReport, Family, LogMarginal, Provenance};
use crate::numerics::dist::Beta;
use crate::numerics::special::{ln_beta, ln_choose, log_sum_exp};
use crate::region::HypothesisRegion;

/// How the count data were sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingModel {
    /// Fixed number of trials.
    Binomial,
    /// Fixed number of successes, random number of trials.
    NegativeBinomial,
    /// Arithmetic mean of the two corrected marginals.
    Average,
}

/// `x` successes in `n` trials with a `Beta(α, α)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountData {
    pub successes: u64,
    pub trials: u64,
    pub model: SamplingModel,
    pub alpha: f64,
}

impl CountData {
    pub fn new(successes: u64, trials: u64, model: SamplingModel, alpha: f64) -> Result<Self> {
        let d = CountData { successes, trials, model, alpha };
        d.validate()?;
        Ok(d)
    }

    pub fn binomial(successes: u64, trials: u64) -> Result<Self> {
        Self::new(successes, trials, SamplingModel::Binomial, 1.0)
    }

    pub fn negative_binomial(successes: u64, trials: u64) -> Result<Self> {
        Self::new(successes, trials, SamplingModel::NegativeBinomial, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(EbfError::domain(format!("prior shape α must be positive, got {}", self.alpha)));
        }
        if self.trials == 0 {
            return Err(EbfError::domain("at least one trial is required"));
        }
        if self.successes > self.trials {
            return Err(EbfError::domain(format!(
                "successes {} exceed trials {}",
                self.successes, self.trials
            )));
        }
        if self.model != SamplingModel::Binomial && self.successes == 0 {
            return Err(EbfError::domain("the negative binomial model needs at least one success"));
        }
        Ok(())
    }

    fn as_model(&self, model: SamplingModel) -> Self {
        CountData { model, ..*self }
    }
}

fn unit_region(region: &HypothesisRegion) -> Result<HypothesisRegion> {
    region.validate()?;
    region.clip(0.0, 1.0)
}

/// `x log p + y log(1 − p)` with `0 · log 0 = 0`.
fn ln_bernoulli_kernel(p: f64, x: f64, y: f64) -> f64 {
    let a = if x == 0.0 { 0.0 } else { x * p.ln() };
    let b = if y == 0.0 { 0.0 } else { y * (-p).ln_1p() };
    a + b
}

/// `log B(a, b) + log P_{Beta(a, b)}(H)`, the log of `∫_H p^{a−1}(1−p)^{b−1} dp`.
fn ln_beta_region(a: f64, b: f64, region: &HypothesisRegion) -> Result<f64> {
    let mass = match region {
        HypothesisRegion::Full => 0.0,
        r => r.ln_mass(&Beta::new(a, b)?)?,
    };
    Ok(ln_beta(a, b) + mass)
}

/// Log marginal for `x` successes and `f` failures with the model's
/// combinatorial factor `ln_comb`.
fn count_log_marginal(ln_comb: f64, x: f64, f: f64, alpha: f64, region: &HypothesisRegion) -> Result<f64> {
    match *region {
        HypothesisRegion::Point { value } => Ok(ln_comb + ln_bernoulli_kernel(value, x, f)),
        _ => Ok(ln_comb + ln_beta_region(2.0 * x + alpha, 2.0 * f + alpha, region)?
            - ln_beta_region(x + alpha, f + alpha, region)?),
    }
}

/// Uncorrected log posterior marginal likelihood under the binomial model.
pub fn binom_posterior_marginal(data: &CountData, region: &HypothesisRegion) -> Result<LogMarginal> {
    data.validate()?;
    let region = unit_region(region)?;
    let (x, n) = (data.successes as f64, data.trials as f64);
    let v = count_log_marginal(ln_choose(n, x), x, n - x, data.alpha, &region)?;
    Ok(LogMarginal::uncorrected(v, Family::Binomial, region))
}

/// Uncorrected log posterior marginal likelihood under the negative
/// binomial model.
pub fn negbinom_posterior_marginal(data: &CountData, region: &HypothesisRegion) -> Result<LogMarginal> {
    data.as_model(SamplingModel::NegativeBinomial).validate()?;
    let region = unit_region(region)?;
    let (x, n) = (data.successes as f64, data.trials as f64);
    let v = count_log_marginal(ln_choose(n - 1.0, x - 1.0), x, n - x, data.alpha, &region)?;
    Ok(LogMarginal::uncorrected(v, Family::NegativeBinomial, region))
}

/// Expected bias of the binomial posterior marginal likelihood for `n`
/// trials, as an exact double sum over data and replicate counts.
///
/// Points take no bias. The prior predictive weights are
/// `Pr(x, y) = C(n,x) C(n,y) B(x+y+α, 2n−x−y+α) / B(α,α)`.
pub fn binom_expected_bias(n: u64, region: &HypothesisRegion, alpha: f64) -> Result<BiasValue> {
    if n == 0 {
        return Err(EbfError::domain("at least one trial is required"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(EbfError::domain(format!("prior shape α must be positive, got {alpha}")));
    }
    let region = unit_region(region)?;
    if region.is_point() {
        return Ok(BiasValue::zero());
    }
    let nf = n as f64;
    let len = n as usize + 1;
    let ln_prior = ln_beta(alpha, alpha);
    // P(s): data/replicate pair with s total successes out of 2n.
    let p_tab: Vec<f64> = (0..=2 * n as usize)
        .into_par_iter()
        .map(|s| ln_beta_region(s as f64 + alpha, 2.0 * nf - s as f64 + alpha, &region))
        .collect::<Result<_>>()?;
    let ln_b_pair: Vec<f64> = (0..=2 * n as usize)
        .map(|s| ln_beta(s as f64 + alpha, 2.0 * nf - s as f64 + alpha))
        .collect();
    // Q(y): single-sample posterior normaliser.
    let q_tab: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|y| ln_beta_region(y as f64 + alpha, nf - y as f64 + alpha, &region))
        .collect::<Result<_>>()?;
    let ln_c: Vec<f64> = (0..len).map(|k| ln_choose(nf, k as f64)).collect();

    let rows: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for y in 0..len {
                let w = (ln_c[x] + ln_c[y] + ln_b_pair[x + y] - ln_prior).exp();
                if w == 0.0 {
                    continue;
                }
                let d = (p_tab[2 * x] - q_tab[x]) - (p_tab[x + y] - q_tab[y]);
                acc += w * d;
            }
            acc
        })
        .collect();
    let value: f64 = rows.iter().sum();
    if !value.is_finite() {
        return Err(EbfError::degenerate(format!("region {region} has zero posterior mass for some counts")));
    }
    Ok(BiasValue::exact_sum(value))
}

/// Controls for the truncated negative-binomial bias sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomOptions {
    /// Target for the extrapolation error estimate, in nats.
    pub tolerance: f64,
    /// First truncation point for the trial counts.
    pub initial_trials: u64,
    /// Largest truncation point before giving up.
    pub max_trials: u64,
}

impl Default for NegBinomOptions {
    fn default() -> Self {
        NegBinomOptions { tolerance: 1e-4, initial_trials: 128, max_trials: 16_384 }
    }
}

/// Tables for the negative-binomial sum up to a truncation point.
struct NbTables {
    ln_comb: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    ln_b_pair: Vec<f64>,
}

impl NbTables {
    fn build(x: u64, limit: u64, alpha: f64, region: &HypothesisRegion) -> Result<Self> {
        let xf = x as f64;
        let ln_comb = (0..=limit)
            .map(|n| if n < x { f64::NEG_INFINITY } else { ln_choose(n as f64 - 1.0, xf - 1.0) })
            .collect();
        let q = (0..=limit)
            .into_par_iter()
            .map(|n| if n < x { Ok(f64::NAN) } else { ln_beta_region(xf + alpha, n as f64 - xf + alpha, region) })
            .collect::<Result<_>>()?;
        let p = (0..=2 * limit)
            .into_par_iter()
            .map(|t| {
                if t < 2 * x {
                    Ok(f64::NAN)
                } else {
                    ln_beta_region(2.0 * xf + alpha, t as f64 - 2.0 * xf + alpha, region)
                }
            })
            .collect::<Result<_>>()?;
        let ln_b_pair = (0..=2 * limit)
            .map(|t| if t < 2 * x { f64::NAN } else { ln_beta(2.0 * xf + alpha, t as f64 - 2.0 * xf + alpha) })
            .collect();
        Ok(NbTables { ln_comb, q, p, ln_b_pair })
    }

    fn term(&self, n: usize, m: usize, ln_prior: f64) -> f64 {
        let w = (self.ln_comb[n] + self.ln_comb[m] + self.ln_b_pair[n + m] - ln_prior).exp();
        if w == 0.0 {
            return 0.0;
        }
        w * ((self.p[2 * n] - self.q[n]) - (self.p[n + m] - self.q[m]))
    }

    /// Sum over the square `[x, hi]²` minus the square `[x, lo]²`.
    fn band(&self, x: usize, lo: usize, hi: usize, ln_prior: f64) -> f64 {
        let rows: Vec<f64> = (x..=hi)
            .into_par_iter()
            .map(|n| {
                let start = if n <= lo { lo + 1 } else { x };
                (start..=hi).map(|m| self.term(n, m, ln_prior)).sum()
            })
            .collect();
        rows.iter().sum()
    }
}

/// Expected bias of the negative-binomial posterior marginal likelihood for
/// `x` fixed successes.
///
/// The trial counts are unbounded and the prior predictive tail decays only
/// like `x/N`, so the double sum over `[x, N]²` converges like `1/N`. The
/// sum is evaluated at doubling truncation points and Richardson
/// extrapolated, `2S(2N) − S(N)`; the change between successive
/// extrapolations is the reported error. Exceeding `max_trials` before the
/// tolerance is met is a non-convergence error.
pub fn negbinom_expected_bias_with(
    x: u64,
    region: &HypothesisRegion,
    alpha: f64,
    options: &NegBinomOptions,
) -> Result<BiasValue> {
    if x == 0 {
        return Err(EbfError::domain("the negative binomial model needs at least one success"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(EbfError::domain(format!("prior shape α must be positive, got {alpha}")));
    }
    let region = unit_region(region)?;
    if region.is_point() {
        return Ok(BiasValue::zero());
    }
    let ln_prior = ln_beta(alpha, alpha);
    let xu = x as usize;
    let mut n_trunc = options.initial_trials.max(4 * x);
    let mut tables = NbTables::build(x, options.max_trials.max(n_trunc), alpha, &region)?;
    let mut sum = tables.band(xu, xu - 1, n_trunc as usize, ln_prior);
    let mut previous: Option<f64> = None;
    let mut last_error = f64::INFINITY;
    loop {
        let next = 2 * n_trunc;
        if next > options.max_trials {
            return Err(EbfError::NonConvergence {
                context: format!("negative binomial bias sum for x = {x}"),
                estimate: last_error,
                tolerance: options.tolerance,
            });
        }
        if (next as usize) >= tables.ln_comb.len() {
            tables = NbTables::build(x, next, alpha, &region)?;
        }
        let sum_next = sum + tables.band(xu, n_trunc as usize, next as usize, ln_prior);
        let extrapolated = 2.0 * sum_next - sum;
        if !extrapolated.is_finite() {
            return Err(EbfError::degenerate(format!("region {region} has zero posterior mass for some counts")));
        }
        if let Some(prev) = previous {
            let err = (extrapolated - prev).abs();
            last_error = err;
            if err <= options.tolerance {
                return Ok(BiasValue { value: extrapolated, provenance: Provenance::ExactSum, achieved_error: Some(err) });
            }
        }
        previous = Some(extrapolated);
        sum = sum_next;
        n_trunc = next;
    }
}

/// [`negbinom_expected_bias_with`] at the default options.
pub fn negbinom_expected_bias(x: u64, region: &HypothesisRegion, alpha: f64) -> Result<BiasValue> {
    negbinom_expected_bias_with(x, region, alpha, &NegBinomOptions::default())
}

fn binom_corrected(data: &CountData, region: &HypothesisRegion) -> Result<LogMarginal> {
    let m = binom_posterior_marginal(data, region)?;
    let b = binom_expected_bias(data.trials, &m.region, data.alpha)?;
    m.correct(b)
}

fn negbinom_corrected(data: &CountData, region: &HypothesisRegion) -> Result<LogMarginal> {
    let m = negbinom_posterior_marginal(data, region)?;
    let b = negbinom_expected_bias(data.successes, &m.region, data.alpha)?;
    m.correct(b)
}

/// Binomial EBF; each composite region takes its own exact-sum bias.
pub fn ebf_binom(data: &CountData, h0: &HypothesisRegion, h1: &HypothesisRegion) -> Result<EvidenceReport> {
    make_report(binom_corrected(data, h0)?, binom_corrected(data, h1)?)
}

/// Negative-binomial EBF.
pub fn ebf_negbinom(data: &CountData, h0: &HypothesisRegion, h1: &HypothesisRegion) -> Result<EvidenceReport> {
    make_report(negbinom_corrected(data, h0)?, negbinom_corrected(data, h1)?)
}

/// EBF under the data's sampling model, averaging the two models when the
/// model is [`SamplingModel::Average`].
pub fn ebf_count(data: &CountData, h0: &HypothesisRegion, h1: &HypothesisRegion) -> Result<EvidenceReport> {
    data.validate()?;
    match data.model {
        SamplingModel::Binomial => ebf_binom(data, h0, h1),
        SamplingModel::NegativeBinomial => ebf_negbinom(data, h0, h1),
        SamplingModel::Average => model_average(
            &[binom_corrected(data, h0)?, negbinom_corrected(data, h0)?],
            &[binom_corrected(data, h1)?, negbinom_corrected(data, h1)?],
        ),
    }
}

/// Arithmetic mean of corrected marginals, computed in log scale.
fn mean_marginal(ms: &[LogMarginal]) -> Result<LogMarginal> {
    let first = ms.first().ok_or_else(|| EbfError::domain("model averaging needs at least one model"))?;
    if ms.iter().any(|m| !m.is_corrected()) {
        return Err(EbfError::Contract("model averaging requires bias-corrected marginals".into()));
    }
    if ms.iter().any(|m| m.region != first.region) {
        return Err(EbfError::Contract("averaged marginals must share one hypothesis region".into()));
    }
    let ln_k = (ms.len() as f64).ln();
    let corrected = log_sum_exp(ms.iter().map(|m| m.log_value)) - ln_k;
    let raw = log_sum_exp(ms.iter().map(|m| m.raw_log_value())) - ln_k;
    let family = if ms.iter().all(|m| m.family == first.family) { first.family } else { Family::CountAverage };
    let provenance = first.bias.map_or(Provenance::ClosedForm, |b| b.provenance);
    let error = ms.iter().filter_map(|m| m.bias.and_then(|b| b.achieved_error)).fold(None, |acc: Option<f64>, e| {
        Some(acc.map_or(e, |a| a.max(e)))
    });
    // The effective bias is whatever separates the averaged raw and
    // averaged corrected marginals.
    let bias = BiasValue { value: raw - corrected, provenance, achieved_error: error };
    Ok(LogMarginal { log_value: corrected, bias: Some(bias), family, region: first.region })
}

/// Model-averaged EBF: per hypothesis, the arithmetic mean of the
/// linear-scale corrected marginals, then their ratio.
pub fn model_average(h0_models: &[LogMarginal], h1_models: &[LogMarginal]) -> Result<EvidenceReport> {
    let m0 = mean_marginal(h0_models)?;
    let mut m1 = mean_marginal(h1_models)?;
    if m0.family != m1.family {
        m1.family = Family::CountAverage;
    }
    let mut m0 = m0;
    if m0.family != m1.family {
        m0.family = Family::CountAverage;
    }
    make_report(m0, m1)
}
