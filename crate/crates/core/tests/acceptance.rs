//! Acceptance criteria. Each test prints one PASS or FAIL line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` gives a
//! one-line-per-criterion summary.

use std::time::Instant;

use ebf_core::calibration::{calibration_table, held_ott_bound, sellke_bound};
use ebf_core::count::binom_expected_bias;
use ebf_core::f_test::f_expected_bias;
use ebf_core::multitest::multi_ebf;
use ebf_core::normal::{ebf_chi_squared, ebf_directional, ebf_interval, ebf_one_sided, ebf_two_sided, normal_log_marginal};
use ebf_core::numerics::dist::{chi2_cdf, normal_cdf, normal_pdf};
use ebf_core::numerics::quad::{integrate_1d, Domain, QuadratureSpec};
use ebf_core::pvalue::{ebf_pvalue, posterior_prob_h0};
use ebf_core::sim::{null_behaviour_exact, null_behaviour_monte_carlo, run_experiment, run_largescale, Scenario, ScenarioSpec};
use ebf_core::t_test::{ebf_t, t_expected_bias};
use ebf_core::{HypothesisRegion, MultiTestBatch};

const SEED: u64 = 20_240_601;

fn verdict(id: u32, name: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        println!("PASS criterion {id} ({name}): {detail}");
    } else {
        println!("FAIL criterion {id} ({name}): {detail}; {}", failures.join("; "));
    }
    assert!(failures.is_empty(), "criterion {id} failed: {}", failures.join("; "));
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

#[test]
fn criterion_01_t_bias_table() {
    let start = Instant::now();
    let table = [1.39, 0.860, 0.710, 0.644, 0.608, 0.586, 0.571, 0.560, 0.552, 0.546];
    let mut f = Vec::new();
    for (i, &want) in table.iter().enumerate() {
        let got = t_expected_bias(i as f64 + 1.0).unwrap().value;
        check(&mut f, (got - want).abs() <= 0.01, || format!("ν = {}: {got:.4} vs {want}", i + 1));
    }
    let b30 = t_expected_bias(30.0).unwrap().value;
    check(&mut f, (b30 - 0.513).abs() <= 0.005, || format!("ν = 30: {b30:.4} vs 0.513"));
    verdict(1, "t bias table", &f, &format!("ν = 1..10 and 30 in {:.2?}", start.elapsed()));
}

#[test]
fn criterion_02_binomial_bias_table() {
    let start = Instant::now();
    let table = [0.231, 0.316, 0.360, 0.387, 0.405, 0.418, 0.428, 0.436, 0.442, 0.447];
    let mut f = Vec::new();
    for (i, &want) in table.iter().enumerate() {
        let got = binom_expected_bias(i as u64 + 1, &HypothesisRegion::Full, 1.0).unwrap().value;
        check(&mut f, format!("{got:.3}") == format!("{want:.3}"), || format!("n = {}: {got:.5} vs {want}", i + 1));
    }
    let elapsed = start.elapsed();
    check(&mut f, elapsed.as_secs_f64() < 1.0, || format!("runtime {elapsed:.2?}"));
    verdict(2, "binomial bias table", &f, &format!("n = 1..10 in {elapsed:.2?}"));
}

#[test]
fn criterion_03_f_bias_table() {
    let start = Instant::now();
    let dfs = [1.0, 5.0, 10.0, 20.0, 50.0];
    let table = [
        [0.609, 0.650, 0.670, 0.681, 0.688],
        [0.650, 0.527, 0.526, 0.534, 0.542],
        [0.670, 0.526, 0.513, 0.513, 0.518],
        [0.681, 0.534, 0.513, 0.506, 0.507],
        [0.688, 0.542, 0.518, 0.507, 0.503],
    ];
    let mut got = [[0.0; 5]; 5];
    let mut f = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            got[i][j] = f_expected_bias(dfs[i], dfs[j]).unwrap().value;
            let want = table[i][j];
            let g = got[i][j];
            check(&mut f, (g - want).abs() <= 0.01, || format!("({}, {}): {g:.4} vs {want}", dfs[i], dfs[j]));
        }
    }
    for i in 0..5 {
        for j in 0..i {
            let d = (got[i][j] - got[j][i]).abs();
            check(&mut f, d <= 5e-3, || format!("asymmetry {d:e} at ({}, {})", dfs[i], dfs[j]));
        }
    }
    verdict(3, "F bias table", &f, &format!("25 cells in {:.2?}", start.elapsed()));
}

fn quad_marginal(z: f64, region: &HypothesisRegion) -> f64 {
    let spec = QuadratureSpec::new(1e-300, 1e-13, 4000).unwrap();
    let (lo, hi) = region.bounds();
    let c = z.clamp(lo.max(-1e300), hi.min(1e300));
    let scale = if c == z { 1.0 } else { 1.0 / (1.0 + (z - c).abs()) };
    let dom = Domain::new(lo, hi).with_center(c).with_scale(scale);
    let num = integrate_1d(|t| normal_pdf(z - t).powi(2), dom, &spec).value;
    let den = integrate_1d(|t| normal_pdf(z - t), dom, &spec).value;
    (num / den).ln()
}

#[test]
fn criterion_04_closed_forms_match_quadrature() {
    let mut f = Vec::new();
    let mut worst: f64 = 0.0;
    let pos = HypothesisRegion::Above { bound: 0.0 };
    let neg = HypothesisRegion::Below { bound: 0.0 };
    for i in 0..=120 {
        let z = -6.0 + 0.1 * i as f64;
        let full = quad_marginal(z, &HypothesisRegion::Full);
        let (mp, mn) = (quad_marginal(z, &pos), quad_marginal(z, &neg));
        let lik = normal_pdf(z).ln();
        let pairs = [
            (ebf_two_sided(z).unwrap().ebf01_log, lik - full + 0.5),
            (ebf_one_sided(z, true).unwrap().ebf01_log, lik - mp + 0.25),
            (ebf_one_sided(z, false).unwrap().ebf01_log, lik - mp + 0.5),
            (ebf_directional(z).unwrap().ebf01_log, mn - mp),
            (normal_log_marginal(z, &pos).unwrap().log_value, mp),
        ];
        for (got, want) in pairs {
            worst = worst.max((got - want).abs());
        }
        for d in [1u32, 2, 3, 5] {
            if z < 0.0 {
                continue;
            }
            let zk = z / (d as f64).sqrt();
            let want = d as f64 * (normal_pdf(zk).ln() - quad_marginal(zk, &HypothesisRegion::Full) + 0.5);
            worst = worst.max((ebf_chi_squared(z * z, d).unwrap().ebf01_log - want).abs());
        }
    }
    check(&mut f, worst <= 1e-8, || format!("largest log discrepancy {worst:e}"));
    verdict(4, "closed forms vs quadrature", &f, &format!("largest log discrepancy {worst:.1e} over z ∈ [−6, 6]"));
}

#[test]
fn criterion_05_nonparametric_anchors() {
    let mut f = Vec::new();
    let e = ebf_pvalue(0.05).unwrap().ebf01;
    check(&mut f, (e * 2.05 - 1.0).abs() <= 0.005, || format!("EBF₀₁(0.05) = 1/{:.4}", 1.0 / e));
    let s = sellke_bound(0.05).unwrap();
    check(&mut f, (s * 2.45 - 1.0).abs() <= 0.005, || format!("Sellke = 1/{:.4}", 1.0 / s));
    let h = held_ott_bound(0.05).unwrap();
    check(&mut f, (h * 7.55 - 1.0).abs() <= 0.005, || format!("Held–Ott = 1/{:.4}", 1.0 / h));
    let post = posterior_prob_h0(0.005, 1.0).unwrap();
    check(&mut f, (post - 0.048).abs() <= 0.001, || format!("Pr(H₀ | p = 0.005) = {post:.4}"));
    let mut worst = (0.0, 0.0);
    for i in 0..=3000 {
        // Log grid from 1e-300 up to 0.1 inclusive.
        let p = 10f64.powf(-300.0 + 299.0 * i as f64 / 3000.0);
        let dev = (ebf_pvalue(p).unwrap().ebf01 / (10.0 * p) - 1.0).abs();
        if dev > worst.1 {
            worst = (p, dev);
        }
    }
    check(&mut f, worst.1 < 0.05, || format!("10p rule off by {:.2}% at p = {:.4}", 100.0 * worst.1, worst.0));
    verdict(5, "non-parametric anchors", &f, &format!("EBF₀₁(0.05) = 1/{:.3}, Pr(H₀ | 0.005) = {post:.4}", 1.0 / e));
}

#[test]
fn criterion_06_calibration_table() {
    let printed = [
        [0.038, 0.049, 0.052, 0.027],
        [0.008, 0.013, 0.016, 0.007],
        [0.002, 0.004, 0.005, 0.002],
        [0.0005, 0.001, 0.001, 0.0005],
    ];
    let rows = calibration_table(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut f = Vec::new();
    for (row, want) in rows.iter().zip(printed) {
        let got = [row.normal, row.chi2_2, row.chi2_3, row.nonparametric];
        for (g, w) in got.iter().zip(want) {
            check(&mut f, (g - w).abs() <= 0.001, || format!("units {}: {g:.5} vs {w}", row.units));
        }
    }
    verdict(6, "calibration table", &f, "12 P-values at units 1 to 4");
}

#[test]
fn criterion_07_case_studies() {
    let mut f = Vec::new();
    let a = ebf_two_sided(16.6 / 12.96).unwrap().ebf01;
    check(&mut f, (a - 1.03).abs() <= 0.01, || format!("two-sided stent EBF₀₁ = {a:.4}"));
    let b = ebf_interval(16.6, 12.96, &HypothesisRegion::Below { bound: 30.0 }, &HypothesisRegion::Above { bound: 30.0 })
        .unwrap()
        .ebf01;
    check(&mut f, (b - 2.29).abs() <= 0.01, || format!("stent interval EBF₀₁ = {b:.4}"));
    let c = ebf_one_sided(5.0, true).unwrap().ebf10;
    check(&mut f, (c / 1.48e5 - 1.0).abs() <= 0.01, || format!("5σ one-sided EBF₁₀ = {c:.4e}"));
    let d = ebf_interval(5.0, 1.0, &HypothesisRegion::Point { value: 5.8 }, &HypothesisRegion::Full).unwrap().ebf01;
    check(&mut f, (d - 1.69).abs() <= 0.01, || format!("5.8σ expectation EBF₀₁ = {d:.4}"));
    verdict(7, "case studies", &f, &format!("{a:.3}, {b:.3}, {c:.4e}, {d:.3}"));
}

#[test]
fn criterion_08_null_consistency() {
    let mut f = Vec::new();
    let exact = null_behaviour_exact().unwrap();
    let c = 1.0 + std::f64::consts::LN_2;
    let via_normal = 1.0 - 2.0 * normal_cdf(-c.sqrt());
    let p = exact.prob_favour_h0.mean;
    check(&mut f, (p - via_normal).abs() <= 1e-6, || format!("χ² route {p} vs normal route {via_normal}"));
    check(&mut f, (p - chi2_cdf(c, 1.0).unwrap()).abs() <= 1e-15, || "exact value mismatch".into());
    check(&mut f, (p - 0.807).abs() <= 5e-4, || format!("P(EBF₀₁ > 1) = {p:.6}"));
    let spec = QuadratureSpec::new(1e-14, 1e-12, 500).unwrap();
    let mean_log = integrate_1d(|z| normal_pdf(z) * ebf_two_sided(z).unwrap().ebf01_log, Domain::real_line(), &spec).value;
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    check(&mut f, (mean_log - half_ln2).abs() <= 1e-8, || format!("E log EBF₀₁ = {mean_log} by quadrature"));
    check(&mut f, exact.mean_log_ebf01.mean == half_ln2, || "exact mean mismatch".into());
    let mc = null_behaviour_monte_carlo(1_000_000, SEED).unwrap();
    let pm = mc.prob_favour_h0.mean;
    check(&mut f, (pm - p).abs() <= 0.005, || format!("Monte Carlo P = {pm:.4}"));
    let lm = mc.mean_log_ebf01;
    check(&mut f, (lm.mean - half_ln2).abs() <= 4.0 * lm.se, || format!("Monte Carlo E log = {:.4} ± {:.4}", lm.mean, lm.se));
    verdict(8, "consistency under H₀", &f, &format!("P = {p:.6} (MC {pm:.4}), E log EBF₀₁ = {mean_log:.6}"));
}

#[test]
fn criterion_09_simulation_tables() {
    let mut f = Vec::new();
    let mut summary = Vec::new();
    for s in [Scenario::Null, Scenario::Random, Scenario::Grid] {
        let t = run_experiment(&ScenarioSpec::desk(s, SEED)).unwrap();
        let b1 = t.bias[0];
        check(&mut f, (b1.unadjusted.mean - 0.5).abs() <= 0.03, || format!("{s:?}: m = 1 unadjusted {:.3}", b1.unadjusted.mean));
        check(&mut f, b1.adjusted.mean.abs() <= 0.03, || format!("{s:?}: m = 1 adjusted {:.3}", b1.adjusted.mean));
        if s == Scenario::Null {
            for w in t.bias.windows(2) {
                check(&mut f, w[1].unadjusted.mean < w[0].unadjusted.mean, || format!("scenario 1 not decreasing at m = {}", w[1].m));
            }
        }
        for r in &t.mse {
            match s {
                Scenario::Grid => {
                    let se = r.single.se.max(r.multiple.se);
                    check(&mut f, (r.multiple.mean - r.single.mean).abs() <= 3.0 * se, || format!("scenario 3 m = {}: MSE differs", r.m));
                }
                _ => check(&mut f, r.multiple.mean <= r.single.mean, || format!("{s:?} m = {}: multiple MSE above single", r.m)),
            }
        }
        let last = t.bias.last().unwrap();
        summary.push(format!("s{} m=10 unadj {:.3}", s.id(), last.unadjusted.mean));
    }
    verdict(9, "simulation tables", &f, &summary.join(", "));
}

#[test]
fn criterion_10_large_scale() {
    let mut f = Vec::new();
    let r = run_largescale(900, 100, SEED).unwrap();
    let violations: Vec<String> = r
        .true_positive
        .iter()
        .filter(|row| row.multi.is_some_and(|m| m < row.single))
        .map(|row| format!("t = {:.2}: {:.3} < {:.3}", row.threshold, row.multi.unwrap(), row.single))
        .collect();
    check(&mut f, violations.is_empty(), || {
        format!("multi curve below single at {} of {} thresholds (first {})", violations.len(), r.true_positive.len(), violations[0])
    });
    check(&mut f, r.rank_correlation > 0.99, || format!("rank correlation {:.4}", r.rank_correlation));
    verdict(
        10,
        "large-scale multiplicity",
        &f,
        &format!(
            "rank correlation {:.5}, signal mean ranks {:.1} single vs {:.1} multi",
            r.rank_correlation, r.mean_rank_single, r.mean_rank_multi
        ),
    );
}

#[test]
fn criterion_11_reductions_and_invariances() {
    let mut f = Vec::new();
    let p0 = HypothesisRegion::Point { value: 0.0 };
    let pairs = [
        (p0, HypothesisRegion::Full),
        (p0, HypothesisRegion::Above { bound: 0.0 }),
        (HypothesisRegion::Below { bound: 0.0 }, HypothesisRegion::Above { bound: 0.0 }),
    ];
    for i in 0..=40 {
        let z = -5.0 + 0.25 * i as f64;
        for (h0, h1) in pairs {
            let batch = MultiTestBatch::from_slices(&[z], &[1.0], 1.0, h0, h1).unwrap();
            let multi = multi_ebf(&batch).unwrap()[0].ebf01_log;
            let single = ebf_interval(z, 1.0, &h0, &h1).unwrap().ebf01_log;
            check(&mut f, (multi - single).abs() <= 1e-12, || format!("m = 1 reduction at z = {z}, {h0} vs {h1}"));
        }
        for r in [ebf_two_sided(z).unwrap(), ebf_one_sided(z, true).unwrap(), ebf_directional(z).unwrap(), ebf_t(z, 4.0, &p0, &HypothesisRegion::Full).unwrap()] {
            check(&mut f, r.ebf01_log + r.ebf10_log == 0.0, || format!("EBF₀₁·EBF₁₀ ≠ 1 at z = {z}"));
        }
        let anti = ebf_directional(z).unwrap().ebf01_log + ebf_directional(-z).unwrap().ebf01_log;
        check(&mut f, anti.abs() <= 1e-12, || format!("directional antisymmetry {anti:e} at z = {z}"));
        let t = ebf_t(z, 1e4, &p0, &HypothesisRegion::Full).unwrap().ebf01;
        let n = ebf_two_sided(z).unwrap().ebf01;
        check(&mut f, (t / n - 1.0).abs() <= 0.01, || format!("t at ν = 10⁴ vs normal at z = {z}: {t} vs {n}"));
    }
    verdict(11, "reductions and invariances", &f, "multi m = 1, reciprocity, antisymmetry, t normal limit");
}
