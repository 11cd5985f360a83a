//! Seeded Monte Carlo experiments for the normal-mean EBFs.
//!
//! Every replicate draws from its own [`RngStream`] keyed by the master seed
//! and the replicate index, and per-replicate results are reduced in index
//! order, so output is bit-identical for any number of worker threads.
//! Experiments work with summary statistics directly: a sample of size n
//! with unit population variance becomes an estimate with standard error
//! `η = 1/√n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics, RankTieBreaker, Statistics};

use crate::error::{EbfError, Result};
use crate::multitest::{multi_log_marginals, MultiTestBatch};
use crate::normal::ebf_two_sided;
use crate::numerics::dist::{chi2_cdf, normal_ln_pdf, Continuous, NoncentralChiSquared};
use crate::numerics::rng::RngStream;
use crate::numerics::special::log_sum_exp;
use crate::region::HypothesisRegion;

/// Replicates used by default.
pub const DESK_REPLICATES: usize = 2_000;
/// Replicates for full-scale runs.
pub const PAPER_REPLICATES: usize = 10_000;

/// How the true means are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// All means zero.
    Null,
    /// Means drawn from `N(0, 1)` afresh in every replicate.
    Random,
    /// Means evenly spaced over `[−5, 5]`, endpoints included.
    Grid,
}

impl Scenario {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Scenario::Null),
            2 => Ok(Scenario::Random),
            3 => Ok(Scenario::Grid),
            _ => Err(EbfError::domain(format!("scenario must be 1, 2 or 3, got {id}"))),
        }
    }

    pub fn id(&self) -> u32 {
        match self {
            Scenario::Null => 1,
            Scenario::Random => 2,
            Scenario::Grid => 3,
        }
    }
}

/// Settings for the bias and mean-square-error experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    /// Batch sizes to evaluate.
    pub ms: Vec<usize>,
    pub replicates: usize,
    /// Per-test sample size; the standard error is `1/√n`.
    pub sample_size: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Batch sizes 1 to 10, desk-scale replicates and n = 100.
    pub fn desk(scenario: Scenario, seed: u64) -> Self {
        ScenarioSpec { scenario, ms: (1..=10).collect(), replicates: DESK_REPLICATES, sample_size: 100.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ms.is_empty() || self.ms.contains(&0) {
            return Err(EbfError::domain("batch sizes must be a non-empty list of positive integers"));
        }
        if self.replicates < 2 {
            return Err(EbfError::domain("at least two replicates are needed for a standard error"));
        }
        if !(self.sample_size >= 1.0) || !self.sample_size.is_finite() {
            return Err(EbfError::domain(format!("sample size must be at least 1, got {}", self.sample_size)));
        }
        Ok(())
    }

    fn se(&self) -> f64 {
        1.0 / self.sample_size.sqrt()
    }
}

/// True means for a batch of size `m`; `draws` supplies the random means.
fn true_means(scenario: Scenario, m: usize, draws: &[f64]) -> Vec<f64> {
    match scenario {
        Scenario::Null => vec![0.0; m],
        Scenario::Random => draws[..m].to_vec(),
        Scenario::Grid if m == 1 => vec![0.0],
        Scenario::Grid => (0..m).map(|i| -5.0 + 10.0 * i as f64 / (m - 1) as f64).collect(),
    }
}

/// Per-replicate averages over the tests in one batch.
#[derive(Debug, Clone, Copy)]
struct ReplicateStats {
    bias_unadjusted: f64,
    bias_adjusted: f64,
    mse_single: f64,
    mse_multiple: f64,
}

fn replicate(spec: &ScenarioSpec, index: u64) -> Result<Vec<ReplicateStats>> {
    let max_m = *spec.ms.iter().max().unwrap_or(&1);
    let eta = spec.se();
    let mut rng = RngStream::new(spec.seed, index);
    // Common random numbers: every batch size uses prefixes of the same draws.
    let mu_draws: Vec<f64> = (0..max_m).map(|_| rng.normal()).collect();
    let e_data: Vec<f64> = (0..max_m).map(|_| rng.normal()).collect();
    let e_rep: Vec<f64> = (0..max_m).map(|_| rng.normal()).collect();
    let ln_pair = |a: f64, b: f64| normal_ln_pdf((a - b) / (eta * std::f64::consts::SQRT_2)) - (eta * std::f64::consts::SQRT_2).ln();
    spec.ms
        .iter()
        .map(|&m| {
            let mu = true_means(spec.scenario, m, &mu_draws);
            let x: Vec<f64> = (0..m).map(|i| mu[i] + eta * e_data[i]).collect();
            let y: Vec<f64> = (0..m).map(|i| mu[i] + eta * e_rep[i]).collect();
            let batch = MultiTestBatch::from_slices(&x, &vec![eta; m], 1.0, HypothesisRegion::Point { value: 0.0 }, HypothesisRegion::Full)?;
            let lm = multi_log_marginals(&batch, &HypothesisRegion::Full)?;
            let ln_m = (m as f64).ln();
            let mut acc = ReplicateStats { bias_unadjusted: 0.0, bias_adjusted: 0.0, mse_single: 0.0, mse_multiple: 0.0 };
            for i in 0..m {
                // Marginal of x_i with the replicate batch's mixture posterior as prior.
                let lrep = log_sum_exp(y.iter().map(|&yj| ln_pair(x[i], yj))) - ln_m;
                acc.bias_unadjusted += lm[i].unadjusted - lrep;
                acc.bias_adjusted += lm[i].adjusted - lrep;
                acc.mse_multiple += (lm[i].adjusted - lrep).powi(2);
                let single = ln_pair(x[i], x[i]) - 0.5 - ln_pair(x[i], y[i]);
                acc.mse_single += single * single;
            }
            let k = m as f64;
            Ok(ReplicateStats {
                bias_unadjusted: acc.bias_unadjusted / k,
                bias_adjusted: acc.bias_adjusted / k,
                mse_single: acc.mse_single / k,
                mse_multiple: acc.mse_multiple / k,
            })
        })
        .collect()
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn of(values: &[f64]) -> Self {
        let mean = values.mean();
        let se = values.std_dev() / (values.len() as f64).sqrt();
        Estimate { mean, se }
    }
}

/// One row of the bias table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub m: usize,
    pub unadjusted: Estimate,
    pub adjusted: Estimate,
}

/// One row of the mean-square-error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub m: usize,
    pub single: Estimate,
    pub multiple: Estimate,
}

/// Both tables from one set of draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTables {
    pub bias: Vec<BiasRow>,
    pub mse: Vec<MseRow>,
}

/// Runs the bias and mean-square-error experiments together.
pub fn run_experiment(spec: &ScenarioSpec) -> Result<ExperimentTables> {
    spec.validate()?;
    let per_rep: Vec<Vec<ReplicateStats>> =
        (0..spec.replicates as u64).into_par_iter().map(|r| replicate(spec, r)).collect::<Result<_>>()?;
    let column = |k: usize, f: fn(&ReplicateStats) -> f64| -> Estimate {
        let v: Vec<f64> = per_rep.iter().map(|r| f(&r[k])).collect();
        Estimate::of(&v)
    };
    let mut bias = Vec::with_capacity(spec.ms.len());
    let mut mse = Vec::with_capacity(spec.ms.len());
    for (k, &m) in spec.ms.iter().enumerate() {
        bias.push(BiasRow { m, unadjusted: column(k, |r| r.bias_unadjusted), adjusted: column(k, |r| r.bias_adjusted) });
        mse.push(MseRow { m, single: column(k, |r| r.mse_single), multiple: column(k, |r| r.mse_multiple) });
    }
    Ok(ExperimentTables { bias, mse })
}

/// Bias of the log posterior marginal likelihood of `μ ≠ 0`, with and
/// without the own-term adjustment, against the replicate-prior marginal.
pub fn run_bias_experiment(spec: &ScenarioSpec) -> Result<Vec<BiasRow>> {
    Ok(run_experiment(spec)?.bias)
}

/// Mean square error of the single- and multiple-test log marginals
/// against the replicate-prior marginal.
pub fn run_mse_experiment(spec: &ScenarioSpec) -> Result<Vec<MseRow>> {
    Ok(run_experiment(spec)?.mse)
}

/// One simulated test in the large-scale experiment. EBFs are `log₁₀ EBF₁₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleRecord {
    pub index: usize,
    pub signal: bool,
    pub mu: f64,
    pub estimate: f64,
    pub single: f64,
    pub multi: f64,
    pub multi_small_pi: f64,
}

/// Proportion of signals among tests whose EBF reaches a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruePositiveRow {
    pub threshold: f64,
    pub single_selected: usize,
    pub single: f64,
    pub multi_selected: usize,
    /// Absent when no test reaches the threshold.
    pub multi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleResult {
    pub records: Vec<LargeScaleRecord>,
    /// Mean rank of signal tests, rank 1 being the strongest evidence.
    pub mean_rank_single: f64,
    pub mean_rank_multi: f64,
    /// Spearman correlation between the multi-test EBFs at the two `π_H`.
    pub rank_correlation: f64,
    pub true_positive: Vec<TruePositiveRow>,
}

/// `π_H` values compared in the large-scale experiment.
pub const LARGE_SCALE_PI: (f64, f64) = (1.0, 0.01);
/// Thresholds in the sweep are the single-test EBFs of this many top tests.
pub const LARGE_SCALE_SWEEP: usize = 200;

fn descending_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    Data::new(v.to_vec()).ranks(RankTieBreaker::Average).into_iter().map(|r| n + 1.0 - r).collect()
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (descending_ranks(a), descending_ranks(b));
    let cov = ra.iter().covariance(rb.iter());
    cov / (ra.iter().std_dev() * rb.iter().std_dev())
}

/// `m0` null tests and `m1` tests with `μ ~ N(0, 1)`, all with unit
/// standard error, scored by single- and multi-test EBFs for `μ ≠ 0`.
pub fn run_largescale(m0: usize, m1: usize, seed: u64) -> Result<LargeScaleResult> {
    let m = m0 + m1;
    if m == 0 {
        return Err(EbfError::domain("at least one test is required"));
    }
    let mut rng = RngStream::new(seed, 0);
    let mu: Vec<f64> = (0..m).map(|i| if i < m0 { 0.0 } else { rng.normal() }).collect();
    let x: Vec<f64> = mu.iter().map(|&u| u + rng.normal()).collect();
    let ses = vec![1.0; m];
    let h0 = HypothesisRegion::Point { value: 0.0 };
    let h1 = HypothesisRegion::Full;
    let score = |pi: f64| -> Result<Vec<f64>> {
        let batch = MultiTestBatch::from_slices(&x, &ses, pi, h0, h1)?;
        let r = crate::multitest::multi_ebf(&batch)?;
        Ok(r.iter().map(|r| r.log10_ebf10).collect())
    };
    let multi = score(LARGE_SCALE_PI.0)?;
    let multi_small_pi = score(LARGE_SCALE_PI.1)?;
    let single: Vec<f64> = x.iter().map(|&z| ebf_two_sided(z).map(|r| r.log10_ebf10)).collect::<Result<_>>()?;
    let records: Vec<LargeScaleRecord> = (0..m)
        .map(|i| LargeScaleRecord {
            index: i,
            signal: i >= m0,
            mu: mu[i],
            estimate: x[i],
            single: single[i],
            multi: multi[i],
            multi_small_pi: multi_small_pi[i],
        })
        .collect();

    let mean_rank = |v: &[f64]| {
        if m1 == 0 {
            return f64::NAN;
        }
        descending_ranks(v)[m0..].iter().sum::<f64>() / m1 as f64
    };
    let rank_correlation = if m > 1 { spearman(&multi, &multi_small_pi) } else { 1.0 };

    let mut thresholds = single.clone();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.truncate(LARGE_SCALE_SWEEP.min(m));
    let proportion = |v: &[f64], t: f64| {
        let selected: Vec<usize> = (0..m).filter(|&i| v[i] >= t).collect();
        let hits = selected.iter().filter(|&&i| i >= m0).count();
        (selected.len(), if selected.is_empty() { None } else { Some(hits as f64 / selected.len() as f64) })
    };
    let true_positive = thresholds
        .iter()
        .map(|&t| {
            let (ns, ps) = proportion(&single, t);
            let (nm, pm) = proportion(&multi, t);
            TruePositiveRow { threshold: t, single_selected: ns, single: ps.unwrap_or(0.0), multi_selected: nm, multi: pm }
        })
        .collect();

    Ok(LargeScaleResult {
        records,
        mean_rank_single: mean_rank(&single),
        mean_rank_multi: mean_rank(&multi),
        rank_correlation,
        true_positive,
    })
}

/// `z²` above which the two-sided EBF favours `μ ≠ 0`.
fn ebf_cutoff() -> f64 {
    1.0 + std::f64::consts::LN_2
}

/// `z²` above which the unit-information Bayes factor favours `μ ≠ 0`.
fn unit_information_cutoff(n: f64) -> f64 {
    (n + 1.0).ln() * (n + 1.0) / n
}

/// One point of the sensitivity curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub mu_over_sigma: f64,
    /// Probability the EBF favours the true hypothesis.
    pub ebf: f64,
    pub unit_information: f64,
    /// Probability each Bayes factor favours H₀ when `μ = 0`.
    pub ebf_null: f64,
    pub unit_information_null: f64,
}

/// Probabilities that the two-sided EBF and the unit-information Bayes
/// factor favour the correct hypothesis, from the noncentral `χ²₁` law of
/// `z²` with noncentrality `n(μ/σ)²`.
pub fn sensitivity_curves(n: f64, grid: &[f64]) -> Result<Vec<SensitivityRow>> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(EbfError::domain(format!("sample size must be at least 1, got {n}")));
    }
    let (c_ebf, c_ui) = (ebf_cutoff(), unit_information_cutoff(n));
    let ebf_null = chi2_cdf(c_ebf, 1.0)?;
    let unit_information_null = chi2_cdf(c_ui, 1.0)?;
    grid.iter()
        .map(|&r| {
            if !r.is_finite() {
                return Err(EbfError::domain(format!("μ/σ must be finite, got {r}")));
            }
            let (ebf, unit_information) = if r == 0.0 {
                (ebf_null, unit_information_null)
            } else {
                let law = NoncentralChiSquared::new(1.0, n * r * r)?;
                (law.sf(c_ebf), law.sf(c_ui))
            };
            Ok(SensitivityRow { mu_over_sigma: r, ebf, unit_information, ebf_null, unit_information_null })
        })
        .collect()
}

/// Behaviour of the two-sided EBF under H₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullBehaviour {
    /// `P(EBF₀₁ > 1)`.
    pub prob_favour_h0: Estimate,
    /// `E[log EBF₀₁]`.
    pub mean_log_ebf01: Estimate,
}

/// Exact values: `P(χ²₁ < 1 + log 2)` and `½ log 2`.
pub fn null_behaviour_exact() -> Result<NullBehaviour> {
    Ok(NullBehaviour {
        prob_favour_h0: Estimate { mean: chi2_cdf(ebf_cutoff(), 1.0)?, se: 0.0 },
        mean_log_ebf01: Estimate { mean: 0.5 * std::f64::consts::LN_2, se: 0.0 },
    })
}

/// Draws per random stream in [`null_behaviour_monte_carlo`].
const NULL_CHUNK: usize = 10_000;

/// Monte Carlo estimates from `draws` standard normal statistics.
pub fn null_behaviour_monte_carlo(draws: usize, seed: u64) -> Result<NullBehaviour> {
    if draws < 2 {
        return Err(EbfError::domain("at least two draws are needed"));
    }
    let chunks = draws.div_ceil(NULL_CHUNK);
    let parts: Vec<(f64, f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64);
            let k = NULL_CHUNK.min(draws - c * NULL_CHUNK);
            let (mut favour, mut s, mut s2) = (0.0, 0.0, 0.0);
            for _ in 0..k {
                let l = ebf_two_sided(rng.normal()).map_or(f64::NAN, |r| r.ebf01_log);
                if l > 0.0 {
                    favour += 1.0;
                }
                s += l;
                s2 += l * l;
            }
            (favour, s, s2, k)
        })
        .collect();
    let (mut favour, mut s, mut s2) = (0.0, 0.0, 0.0);
    for (f, a, b, _) in &parts {
        favour += f;
        s += a;
        s2 += b;
    }
    let n = draws as f64;
    let p = favour / n;
    let mean = s / n;
    let var = (s2 / n - mean * mean) * n / (n - 1.0);
    Ok(NullBehaviour {
        prob_favour_h0: Estimate { mean: p, se: (p * (1.0 - p) / n).sqrt() },
        mean_log_ebf01: Estimate { mean, se: (var / n).sqrt() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario) -> ScenarioSpec {
        ScenarioSpec { scenario, ms: vec![1, 2, 10], replicates: 400, sample_size: 100.0, seed: 11 }
    }

    #[test]
    fn single_test_bias_is_half() {
        for s in [Scenario::Null, Scenario::Random, Scenario::Grid] {
            let t = run_experiment(&small(s)).unwrap();
            let b = t.bias[0];
            assert!((b.unadjusted.mean - 0.5).abs() < 4.0 * b.unadjusted.se + 0.01);
            assert!(b.adjusted.mean.abs() < 4.0 * b.adjusted.se + 0.01);
            assert!((b.unadjusted.mean - 0.5 - b.adjusted.mean).abs() < 1e-12);
            // One test: both marginals are the single-test one.
            assert!((t.mse[0].single.mean - t.mse[0].multiple.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_means() {
        assert_eq!(true_means(Scenario::Grid, 3, &[]), vec![-5.0, 0.0, 5.0]);
        assert_eq!(true_means(Scenario::Grid, 1, &[]), vec![0.0]);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = small(Scenario::Random);
        let a = run_experiment(&spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_experiment(&spec).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn null_behaviour() {
        let exact = null_behaviour_exact().unwrap();
        assert!((exact.prob_favour_h0.mean - 0.807).abs() < 5e-4);
        let rows = sensitivity_curves(1000.0, &[0.0, 1.0]).unwrap();
        assert!((rows[0].ebf - 0.807).abs() < 5e-4);
        assert!((1.0 - rows[0].ebf - 0.193).abs() < 5e-4);
        assert!(rows[1].ebf > 0.999_999 && rows[1].unit_information > 0.999_999);
    }

    #[test]
    fn no_signals() {
        let r = run_largescale(50, 0, 3).unwrap();
        assert!(r.true_positive.iter().all(|row| row.single == 0.0 && row.multi.unwrap_or(0.0) == 0.0));
        assert!(run_largescale(0, 0, 3).is_err());
    }
}
