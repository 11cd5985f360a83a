//! Subcommand implementations. Each returns one table for the writer.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ebf_core::calibration::{calibration_curve, calibration_table};
use ebf_core::count::{binom_expected_bias, ebf_count, negbinom_expected_bias};
use ebf_core::f_test::{ebf_anova, ebf_f, f_expected_bias};
use ebf_core::multitest::{multi_ebf, ranked_summary};
use ebf_core::normal::{bias_normal, ebf_chi_squared, ebf_directional, ebf_interval, ebf_one_sided, ebf_two_sided};
use ebf_core::pvalue::{ebf_pvalue, posterior_prob_h0, pvalue_expected_bias, ten_p_rule};
use ebf_core::sim::{
    null_behaviour_exact, null_behaviour_monte_carlo, run_experiment, run_largescale, sensitivity_curves,
    PAPER_REPLICATES,
};
use ebf_core::t_test::{ebf_t, t_expected_bias};
use ebf_core::{
    BiasValue, CountData, EvidenceReport, MultiTestBatch, Provenance, SamplingModel, Scenario, ScenarioSpec,
    TestSummary,
};
use serde::Deserialize;

use crate::output::{Cell, Table};
use crate::{
    AnovaArgs, BiasArgs, BiasFamily, BinomArgs, CalibrateArgs, CliError, Command, CountModel, CurveArgs, FArgs,
    LargeScaleTable, MultiArgs, NormalArgs, PvalueArgs, SimScenario, SimulateArgs, TArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: &Command) -> Result<Table> {
    match cmd {
        Command::Normal(a) => normal(a),
        Command::T(a) => t(a),
        Command::Binom(a) => binom(a),
        Command::F(a) => f(a),
        Command::Anova(a) => anova(a),
        Command::Pvalue(a) => pvalue(a),
        Command::Multi(a) => multi(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Curve(a) => curve(a),
        Command::Bias(a) => bias(a),
        Command::Simulate(a) => simulate(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

const REPORT_COLUMNS: [&str; 10] =
    ["family", "h0", "h1", "ebf01", "ebf10", "ebf01_log", "log10_ebf10", "units_of_evidence", "bias_h0", "bias_h1"];

fn columns(lead: &[&'static str], trail: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(REPORT_COLUMNS.iter()).chain(trail).copied().collect()
}

fn report_cells(r: &EvidenceReport) -> Vec<Cell> {
    vec![
        r.family.as_str().into(),
        r.h0.to_string().into(),
        r.h1.to_string().into(),
        r.ebf01.into(),
        r.ebf10.into(),
        r.ebf01_log.into(),
        r.log10_ebf10.into(),
        r.units_of_evidence.into(),
        r.bias_h0.value.into(),
        r.bias_h1.value.into(),
    ]
}

fn single_report(lead: &[&'static str], values: Vec<Cell>, r: &EvidenceReport) -> Table {
    let mut t = Table { columns: columns(lead, &[]), rows: Vec::new() };
    let mut row = values;
    row.extend(report_cells(r));
    t.push(row);
    t
}

fn normal(a: &NormalArgs) -> Result<Table> {
    if let (Some(x), Some(se)) = (a.x, a.se) {
        let r = ebf_interval(x, se, &a.h0, &a.h1)?;
        return Ok(single_report(&["test", "x", "se"], vec!["regions".into(), x.into(), se.into()], &r));
    }
    if let (Some(z2), Some(d)) = (a.z2, a.dim) {
        let r = ebf_chi_squared(z2, d)?;
        return Ok(single_report(&["test", "z2", "dim"], vec!["chi_squared".into(), z2.into(), d.into()], &r));
    }
    let z = a.z.ok_or_else(|| usage("normal needs one of --z, --x with --se, or --z2 with --dim"))?;
    let (name, r) = if a.directional {
        ("directional", ebf_directional(z)?)
    } else if a.sides == 2 {
        if a.no_negative {
            return Err(usage("--no-negative applies to one-sided tests; add --sides 1"));
        }
        ("two_sided", ebf_two_sided(z)?)
    } else if a.no_negative {
        ("one_sided_nonnegative", ebf_one_sided(z, false)?)
    } else {
        ("one_sided", ebf_one_sided(z, true)?)
    };
    Ok(single_report(&["test", "z"], vec![name.into(), z.into()], &r))
}

fn t(a: &TArgs) -> Result<Table> {
    let r = ebf_t(a.t, a.df, &a.h0, &a.h1)?;
    Ok(single_report(&["t", "df"], vec![a.t.into(), a.df.into()], &r))
}

fn binom(a: &BinomArgs) -> Result<Table> {
    let (model, name) = match a.model {
        CountModel::Binomial => (SamplingModel::Binomial, "binomial"),
        CountModel::Negbinom => (SamplingModel::NegativeBinomial, "negbinom"),
        CountModel::Average => (SamplingModel::Average, "average"),
    };
    let data = CountData::new(a.successes, a.trials, model, a.alpha)?;
    let r = ebf_count(&data, &a.h0, &a.h1)?;
    Ok(single_report(
        &["successes", "trials", "model", "alpha"],
        vec![a.successes.into(), a.trials.into(), name.into(), a.alpha.into()],
        &r,
    ))
}

fn f(a: &FArgs) -> Result<Table> {
    let r = ebf_f(a.x, a.df1, a.df2, &a.h0, &a.h1)?;
    Ok(single_report(&["x", "df1", "df2"], vec![a.x.into(), a.df1.into(), a.df2.into()], &r))
}

fn anova(a: &AnovaArgs) -> Result<Table> {
    let r = ebf_anova(a.x, a.df1, a.df2)?;
    Ok(single_report(&["x", "df1", "df2"], vec![a.x.into(), a.df1.into(), a.df2.into()], &r))
}

fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(std::io::stdin()));
    }
    let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(file))
}

fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(open_input(path)?);
    let idx = rdr
        .headers()?
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| usage(format!("input has no column named '{column}'")))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v = field
            .parse::<f64>()
            .map_err(|_| usage(format!("row {}: cannot parse '{field}' as a number", line + 1)))?;
        out.push(v);
    }
    Ok(out)
}

fn pvalue(a: &PvalueArgs) -> Result<Table> {
    let ps = match &a.input {
        Some(path) => read_column(path, &a.column)?,
        None => a.p.clone(),
    };
    let mut t = Table { columns: columns(&["p"], &["ten_p", "posterior_h0"]), rows: Vec::new() };
    for p in ps {
        let r = ebf_pvalue(p)?;
        let mut row = vec![p.into()];
        row.extend(report_cells(&r));
        row.push(ten_p_rule(p)?.into());
        row.push(posterior_prob_h0(p, a.prior_odds)?.into());
        t.push(row);
    }
    Ok(t)
}

#[derive(Deserialize)]
struct MultiRow {
    id: String,
    estimate: f64,
    se: f64,
}

fn multi(a: &MultiArgs) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open_input(&a.input)?);
    let headers = rdr.headers()?.clone();
    for need in ["id", "estimate", "se"] {
        if !headers.iter().any(|h| h == need) {
            return Err(usage(format!("input CSV needs a header with id,estimate,se; '{need}' is missing")));
        }
    }
    let rows: Vec<MultiRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(usage("input CSV has no tests"));
    }
    let tests: Vec<TestSummary> =
        rows.iter().map(|r| TestSummary { id: r.id.clone(), estimate: r.estimate, se: r.se }).collect();
    let batch = MultiTestBatch::new(tests, a.pi_h, a.h0, a.h1)?;
    let reports = multi_ebf(&batch)?;
    let ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
    let mut rank = vec![0; rows.len()];
    for (pos, r) in ranked_summary(&ids, &reports)?.iter().enumerate() {
        let i = ids.iter().position(|id| *id == r.id).expect("ranked ids come from the input");
        // Duplicate ids resolve to their first unranked occurrence.
        let i = (i..ids.len()).find(|&k| ids[k] == r.id && rank[k] == 0).unwrap_or(i);
        rank[i] = pos + 1;
    }
    let mut t = Table {
        columns: columns(&["id", "estimate", "se", "single_ebf01", "single_log10_ebf10"], &["rank"]),
        rows: Vec::new(),
    };
    for (k, (row, r)) in rows.iter().zip(&reports).enumerate() {
        let single = ebf_interval(row.estimate, row.se, &a.h0, &a.h1)?;
        let mut cells = vec![
            row.id.clone().into(),
            row.estimate.into(),
            row.se.into(),
            single.ebf01.into(),
            single.log10_ebf10.into(),
        ];
        cells.extend(report_cells(r));
        cells.push(rank[k].into());
        t.push(cells);
    }
    Ok(t)
}

fn calibrate(a: &CalibrateArgs) -> Result<Table> {
    let mut t = Table::new(&["units", "ebf10", "normal", "chi2_2", "chi2_3", "nonparametric"]);
    for r in calibration_table(&a.units)? {
        t.push(vec![r.units.into(), r.ebf10.into(), r.normal.into(), r.chi2_2.into(), r.chi2_3.into(), r.nonparametric.into()]);
    }
    Ok(t)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi <= 1.0) {
        return Err(usage(format!("need 0 < p-min < p-max ≤ 1, got {lo} and {hi}")));
    }
    if points < 2 {
        return Err(usage("a log-spaced grid needs at least 2 points"));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points).map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64).min(hi)).collect())
}

fn curve(a: &CurveArgs) -> Result<Table> {
    let grid = if a.grid.is_empty() { log_grid(a.p_min, a.p_max, a.points)? } else { a.grid.clone() };
    let mut t = Table::new(&["p", "neg_log10_p", "ebf_normal", "ebf_nonparametric", "sellke", "brc"]);
    for r in calibration_curve(&grid)? {
        t.push(vec![
            r.p.into(),
            r.neg_log10_p.into(),
            r.ebf_normal.into(),
            r.ebf_nonparametric.into(),
            r.sellke.into(),
            r.brc.into(),
        ]);
    }
    Ok(t)
}

fn provenance(p: Provenance) -> &'static str {
    match p {
        Provenance::ClosedForm => "closed_form",
        Provenance::ExactSum => "exact_sum",
        Provenance::Quadrature => "quadrature",
    }
}

fn bias_cells(b: &BiasValue) -> [Cell; 3] {
    [b.value.into(), provenance(b.provenance).into(), b.achieved_error.into()]
}

fn or_default<T: Clone>(v: &[T], default: impl FnOnce() -> Vec<T>) -> Vec<T> {
    if v.is_empty() {
        default()
    } else {
        v.to_vec()
    }
}

fn bias(a: &BiasArgs) -> Result<Table> {
    const TRAIL: [&str; 3] = ["bias", "provenance", "achieved_error"];
    let with = |lead: &[&'static str]| Table { columns: lead.iter().chain(&TRAIL).copied().collect(), rows: vec![] };
    let one_to_ten_f = || (1..=10).map(f64::from).collect();
    let one_to_ten_u = || (1..=10).collect();
    let t = match a.family {
        BiasFamily::Normal => {
            let mut t = with(&["d1", "d2"]);
            let b = bias_normal(a.d1, a.d2)?;
            t.push([vec![a.d1.into(), a.d2.into()], bias_cells(&b).to_vec()].concat());
            t
        }
        BiasFamily::T => {
            let mut t = with(&["df"]);
            for df in or_default(&a.df, one_to_ten_f) {
                t.push([vec![df.into()], bias_cells(&t_expected_bias(df)?).to_vec()].concat());
            }
            t
        }
        BiasFamily::Binom => {
            let mut t = with(&["n", "alpha"]);
            for n in or_default(&a.n, one_to_ten_u) {
                let b = binom_expected_bias(n, &ebf_core::HypothesisRegion::Full, a.alpha)?;
                t.push([vec![n.into(), a.alpha.into()], bias_cells(&b).to_vec()].concat());
            }
            t
        }
        BiasFamily::Negbinom => {
            let mut t = with(&["x", "alpha"]);
            for x in or_default(&a.n, one_to_ten_u) {
                let b = negbinom_expected_bias(x, &ebf_core::HypothesisRegion::Full, a.alpha)?;
                t.push([vec![x.into(), a.alpha.into()], bias_cells(&b).to_vec()].concat());
            }
            t
        }
        BiasFamily::F => {
            let grid = || vec![1.0, 5.0, 10.0, 20.0, 50.0];
            let mut t = with(&["df1", "df2"]);
            for df1 in or_default(&a.df1, grid) {
                for df2 in or_default(&a.df2, grid) {
                    t.push([vec![df1.into(), df2.into()], bias_cells(&f_expected_bias(df1, df2)?).to_vec()].concat());
                }
            }
            t
        }
        BiasFamily::Pvalue => {
            let mut t = with(&["beta"]);
            for beta in or_default(&a.beta, || vec![1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0]) {
                t.push([vec![beta.into()], bias_cells(&pvalue_expected_bias(beta)?).to_vec()].concat());
            }
            t
        }
    };
    Ok(t)
}

fn simulate(a: &SimulateArgs) -> Result<Table> {
    let replicates = |default: usize| if a.paper_scale { PAPER_REPLICATES } else { a.replicates.unwrap_or(default) };
    match a.scenario {
        SimScenario::Null | SimScenario::Random | SimScenario::Grid => {
            let scenario = match a.scenario {
                SimScenario::Null => Scenario::Null,
                SimScenario::Random => Scenario::Random,
                _ => Scenario::Grid,
            };
            let mut spec = ScenarioSpec::desk(scenario, a.seed);
            spec.ms = a.m.clone();
            spec.replicates = replicates(spec.replicates);
            if let Some(n) = a.sample_size {
                spec.sample_size = n;
            }
            let tables = run_experiment(&spec)?;
            let mut t = Table::new(&[
                "m",
                "bias_unadjusted",
                "bias_unadjusted_se",
                "bias_adjusted",
                "bias_adjusted_se",
                "mse_single",
                "mse_single_se",
                "mse_multiple",
                "mse_multiple_se",
            ]);
            for (b, m) in tables.bias.iter().zip(&tables.mse) {
                t.push(vec![
                    b.m.into(),
                    b.unadjusted.mean.into(),
                    b.unadjusted.se.into(),
                    b.adjusted.mean.into(),
                    b.adjusted.se.into(),
                    m.single.mean.into(),
                    m.single.se.into(),
                    m.multiple.mean.into(),
                    m.multiple.se.into(),
                ]);
            }
            Ok(t)
        }
        SimScenario::Largescale => {
            let r = run_largescale(a.m0, a.m1, a.seed)?;
            let t = match a.table {
                LargeScaleTable::TruePositive => {
                    let mut t =
                        Table::new(&["threshold", "single_selected", "single_tp", "multi_selected", "multi_tp"]);
                    for row in &r.true_positive {
                        t.push(vec![
                            row.threshold.into(),
                            row.single_selected.into(),
                            row.single.into(),
                            row.multi_selected.into(),
                            row.multi.into(),
                        ]);
                    }
                    t
                }
                LargeScaleTable::Tests => {
                    let mut t = Table::new(&["index", "signal", "mu", "estimate", "single", "multi", "multi_small_pi"]);
                    for rec in &r.records {
                        t.push(vec![
                            rec.index.into(),
                            rec.signal.into(),
                            rec.mu.into(),
                            rec.estimate.into(),
                            rec.single.into(),
                            rec.multi.into(),
                            rec.multi_small_pi.into(),
                        ]);
                    }
                    t
                }
                LargeScaleTable::Summary => {
                    let mut t =
                        Table::new(&["m0", "m1", "seed", "mean_rank_single", "mean_rank_multi", "rank_correlation"]);
                    t.push(vec![
                        a.m0.into(),
                        a.m1.into(),
                        a.seed.into(),
                        r.mean_rank_single.into(),
                        r.mean_rank_multi.into(),
                        r.rank_correlation.into(),
                    ]);
                    t
                }
            };
            Ok(t)
        }
        SimScenario::Sensitivity => {
            let grid = or_default(&a.grid, || (0..=120).map(|i| 0.0025 * f64::from(i)).collect());
            let mut t = Table::new(&["mu_over_sigma", "ebf", "unit_information", "ebf_null", "unit_information_null"]);
            for r in sensitivity_curves(a.sample_size.unwrap_or(1000.0), &grid)? {
                t.push(vec![
                    r.mu_over_sigma.into(),
                    r.ebf.into(),
                    r.unit_information.into(),
                    r.ebf_null.into(),
                    r.unit_information_null.into(),
                ]);
            }
            Ok(t)
        }
        SimScenario::NullBehaviour => {
            let exact = null_behaviour_exact()?;
            let mc = null_behaviour_monte_carlo(replicates(1_000_000), a.seed)?;
            let mut t = Table::new(&["quantity", "exact", "monte_carlo", "monte_carlo_se"]);
            t.push(vec![
                "prob_favour_h0".into(),
                exact.prob_favour_h0.mean.into(),
                mc.prob_favour_h0.mean.into(),
                mc.prob_favour_h0.se.into(),
            ]);
            t.push(vec![
                "mean_log_ebf01".into(),
                exact.mean_log_ebf01.mean.into(),
                mc.mean_log_ebf01.mean.into(),
                mc.mean_log_ebf01.se.into(),
            ]);
            Ok(t)
        }
    }
}
