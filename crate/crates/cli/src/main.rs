//! `ebf`: empirical Bayes factors from the command line.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebf_core::{EbfError, HypothesisRegion};

use crate::output::Format;

const REGION_HELP: &str = "point:V, below:B, above:B, interval:A,B or full";

#[derive(Parser, Debug)]
#[command(name = "ebf", version, about = "Empirical Bayes factors for common hypothesis tests")]
#[command(after_help = "Regions are written point:V, below:B, above:B, interval:A,B or full.\n\
Exit status: 0 on success, 2 on a usage or domain error, 3 on numerical non-convergence.")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "EBF_FORMAT", default_value = "json")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal test statistic with known variance.
    ///
    /// Two-sided: EBF01 = √2·exp(−(z²−1)/2). One-sided against θ > 0:
    /// EBF01 = [Φ(z)√2/Φ(z√2)]·exp(−(z²−1/2)/2), or exp(−(z²−1)/2) times the
    /// same ratio when negative values are impossible. Directional θ < 0 vs
    /// θ > 0: EBF01 = Φ(−z√2)Φ(z) / (Φ(z√2)Φ(−z)). Multivariate:
    /// EBF01 = 2^{d/2}·exp(−(z²−d)/2). General regions use the normal
    /// posterior marginal with a bias of ½ for the full line, ¼ for a
    /// half-line and 0 for points and bounded intervals.
    Normal(NormalArgs),
    /// t statistic with ν degrees of freedom.
    ///
    /// The posterior marginal is c(ν) times the ratio of the region's mass
    /// under a t with 2ν+1 degrees of freedom and scale √(ν/(2ν+1)) to its
    /// mass under t with ν degrees of freedom, both centred at t. The bias is
    /// found by nested quadrature, halved for half-lines.
    T(TArgs),
    /// Binomial or negative-binomial count under a Beta(α, α) prior.
    ///
    /// M_H(x) = L·B(2x+α, 2(n−x)+α)/B(x+α, n−x+α) times the ratio of the
    /// region's posterior masses, with the bias summed exactly over the prior
    /// predictive of data and replicate.
    Binom(BinomArgs),
    /// F statistic with (ν1, ν2) degrees of freedom and unknown scale r,
    /// where rX follows F(ν1, ν2).
    ///
    /// M_H(x) = B(ν1,ν2)/(B(ν1/2,ν2/2)²·x) times the ratio of the region's
    /// mass under F(2ν1, 2ν2) to its mass under F(ν1, ν2). The bias is a
    /// double integral over the log-F location family.
    F(FArgs),
    /// One-sided ANOVA, r = 1 against r < 1 (an inflated F statistic).
    ///
    /// M_1(x) = B(ν1,ν2)·F_{2ν1,2ν2}(x) / [B(ν1/2,ν2/2)²·x·F_{ν1,ν2}(x)],
    /// with the full F bias; the null uses the F(ν1, ν2) density at x.
    Anova(AnovaArgs),
    /// Non-parametric EBF from P-values under a Beta(1, β) likelihood.
    ///
    /// With ℓ = −log(1−p), M = (¼ + ℓ/2 + ℓ²/2)/(ℓ + ℓ²) and
    /// EBF01 = (5/2)/M, close to 10p for small p.
    Pvalue(PvalueArgs),
    /// Multiple normal tests with the mixture posterior.
    ///
    /// Each test's marginal mixes its own posterior, bias-adjusted by
    /// exp(−b), with the other tests' posteriors weighted by π_H. Reads CSV
    /// with header id,estimate,se.
    Multi(MultiArgs),
    /// P-values that reach a number of evidence units, base 2+√3 ≈ 3.73.
    Calibrate(CalibrateArgs),
    /// −log10 Bayes factors for H0 against −log10 p for the two-sided normal
    /// test: normal EBF, non-parametric EBF, Sellke bound −e·p·log p and the
    /// reference criterion exp(−(z²+1)/2).
    Curve(CurveArgs),
    /// Expected bias tables for each test family.
    Bias(BiasArgs),
    /// Seeded simulation studies.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct NormalArgs {
    /// Standardized statistic z = x/σ.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    /// Number of sides for a point null at zero.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub sides: u8,
    /// One-sided test where negative values of θ are impossible.
    #[arg(long)]
    pub no_negative: bool,
    /// Directional test, θ < 0 against θ > 0.
    #[arg(long, conflicts_with_all = ["sides", "no_negative"])]
    pub directional: bool,
    /// Estimate on the original scale, with --se and regions.
    #[arg(long, allow_hyphen_values = true, requires = "se", conflicts_with_all = ["z", "z2"])]
    pub x: Option<f64>,
    /// Standard error of --x.
    #[arg(long, requires = "x")]
    pub se: Option<f64>,
    /// Null region for --x.
    #[arg(long, default_value = "point:0", help = format!("Null region for --x ({REGION_HELP})"))]
    pub h0: HypothesisRegion,
    /// Alternative region for --x.
    #[arg(long, default_value = "full", help = format!("Alternative region for --x ({REGION_HELP})"))]
    pub h1: HypothesisRegion,
    /// Multivariate statistic z² = xᵀΣ⁻¹x, with --dim.
    #[arg(long, requires = "dim", conflicts_with = "z")]
    pub z2: Option<f64>,
    /// Dimension of the multivariate test.
    #[arg(long, requires = "z2")]
    pub dim: Option<u32>,
}

#[derive(Args, Debug)]
pub struct TArgs {
    /// t statistic.
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// Degrees of freedom.
    #[arg(long)]
    pub df: f64,
    #[arg(long, default_value = "point:0", help = format!("Null region on the standardized scale ({REGION_HELP})"))]
    pub h0: HypothesisRegion,
    #[arg(long, default_value = "full", help = format!("Alternative region on the standardized scale ({REGION_HELP})"))]
    pub h1: HypothesisRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountModel {
    Binomial,
    Negbinom,
    Average,
}

#[derive(Args, Debug)]
pub struct BinomArgs {
    /// Number of successes x.
    #[arg(long)]
    pub successes: u64,
    /// Number of trials n.
    #[arg(long)]
    pub trials: u64,
    /// Sampling model; average takes the mean of both corrected marginals.
    #[arg(long, value_enum, default_value = "binomial")]
    pub model: CountModel,
    /// Prior shape α of Beta(α, α).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "point:0.5", help = format!("Null region on the success probability ({REGION_HELP})"))]
    pub h0: HypothesisRegion,
    #[arg(long, default_value = "full", help = format!("Alternative region on the success probability ({REGION_HELP})"))]
    pub h1: HypothesisRegion,
}

#[derive(Args, Debug)]
pub struct FArgs {
    /// Observed F statistic.
    #[arg(long)]
    pub x: f64,
    /// Numerator degrees of freedom.
    #[arg(long)]
    pub df1: f64,
    /// Denominator degrees of freedom.
    #[arg(long)]
    pub df2: f64,
    #[arg(long, default_value = "point:1", help = format!("Null region on the variance ratio; point:1, below:1 or full ({REGION_HELP})"))]
    pub h0: HypothesisRegion,
    #[arg(long, default_value = "full", help = format!("Alternative region on the variance ratio; point:1, below:1 or full ({REGION_HELP})"))]
    pub h1: HypothesisRegion,
}

#[derive(Args, Debug)]
pub struct AnovaArgs {
    /// Observed F statistic.
    #[arg(long)]
    pub x: f64,
    /// Numerator degrees of freedom.
    #[arg(long)]
    pub df1: f64,
    /// Denominator degrees of freedom.
    #[arg(long)]
    pub df2: f64,
}

#[derive(Args, Debug)]
pub struct PvalueArgs {
    /// P-values, repeated or comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "input")]
    pub p: Vec<f64>,
    /// CSV file with a column of P-values ("-" for standard input).
    #[arg(long, conflicts_with = "p")]
    pub input: Option<PathBuf>,
    /// Name of the P-value column in --input.
    #[arg(long, default_value = "p")]
    pub column: String,
    /// Prior odds of H1 to H0 for the posterior probability of H0.
    #[arg(long, default_value_t = 1.0)]
    pub prior_odds: f64,
}

#[derive(Args, Debug)]
pub struct MultiArgs {
    /// CSV file with header id,estimate,se ("-" for standard input).
    #[arg(long)]
    pub input: PathBuf,
    /// Prior weight π_H of the other tests' posteriors.
    #[arg(long, default_value_t = 1.0)]
    pub pi_h: f64,
    #[arg(long, default_value = "point:0", help = format!("Null region on the mean scale ({REGION_HELP})"))]
    pub h0: HypothesisRegion,
    #[arg(long, default_value = "full", help = format!("Alternative region on the mean scale ({REGION_HELP})"))]
    pub h1: HypothesisRegion,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Units of evidence.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [1.0, 2.0, 3.0, 4.0])]
    pub units: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    /// Explicit P-value grid; overrides the log-spaced default.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Vec<f64>,
    /// Smallest P-value of the log-spaced grid.
    #[arg(long, default_value_t = 1e-4)]
    pub p_min: f64,
    /// Largest P-value of the log-spaced grid.
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BiasFamily {
    Normal,
    T,
    Binom,
    Negbinom,
    F,
    Pvalue,
}

#[derive(Args, Debug)]
pub struct BiasArgs {
    #[arg(long, value_enum)]
    pub family: BiasFamily,
    /// Degrees of freedom (t).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub df: Vec<f64>,
    /// Numerator degrees of freedom (F); crossed with --df2.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub df1: Vec<f64>,
    /// Denominator degrees of freedom (F).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub df2: Vec<f64>,
    /// Trials (binomial) or successes (negative binomial).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n: Vec<u64>,
    /// Prior shape α (binomial and negative binomial).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// One-sided components (normal).
    #[arg(long, default_value_t = 0)]
    pub d1: u32,
    /// Two-sided components (normal).
    #[arg(long, default_value_t = 1)]
    pub d2: u32,
    /// Shape β of the replicate Beta(1, β) law (P-value).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimScenario {
    /// All means zero.
    #[value(name = "1")]
    Null,
    /// Means drawn from N(0, 1) in each replicate.
    #[value(name = "2")]
    Random,
    /// Means fixed on a uniform grid over [−5, 5].
    #[value(name = "3")]
    Grid,
    /// Large-scale multiple testing with signal and null tests.
    Largescale,
    /// Probability each Bayes factor favours the true hypothesis.
    Sensitivity,
    /// Behaviour of the two-sided EBF when H0 holds.
    NullBehaviour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LargeScaleTable {
    TruePositive,
    Tests,
    Summary,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario: 1, 2 or 3 for the bias and MSE tables, largescale,
    /// sensitivity, or null-behaviour.
    #[arg(long, value_enum)]
    pub scenario: SimScenario,
    /// Batch sizes for scenarios 1 to 3.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = 1..=10usize)]
    pub m: Vec<usize>,
    /// Replicates for scenarios 1 to 3, or draws for null-behaviour.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Run the full-scale 10,000 replicates.
    #[arg(long, conflicts_with = "replicates")]
    pub paper_scale: bool,
    /// Per-test sample size (scenarios 1 to 3 and sensitivity).
    #[arg(long)]
    pub sample_size: Option<f64>,
    /// Null tests in the large-scale study.
    #[arg(long, default_value_t = 900)]
    pub m0: usize,
    /// Signal tests in the large-scale study.
    #[arg(long, default_value_t = 100)]
    pub m1: usize,
    /// Which large-scale table to emit.
    #[arg(long, value_enum, default_value = "true-positive")]
    pub table: LargeScaleTable,
    /// μ/σ grid for the sensitivity curves.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Vec<f64>,
}

/// Failures mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NonConvergence(String),
}

impl From<EbfError> for CliError {
    fn from(e: EbfError) -> Self {
        if e.is_non_convergence() {
            CliError::NonConvergence(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("malformed CSV: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version exit 0, usage errors exit 2.
        Err(e) => e.exit(),
    };
    let result = commands::run(&cli.command).and_then(|table| {
        let mut out = std::io::stdout().lock();
        table.write(cli.format, &mut out)?;
        out.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
