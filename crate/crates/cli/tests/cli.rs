use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn ebf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebf")).args(args).env_remove("EBF_FORMAT").output().unwrap()
}

fn ebf_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ebf"))
        .args(args)
        .env_remove("EBF_FORMAT")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = ebf(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn first(v: &Value, field: &str) -> f64 {
    v["records"][0][field].as_f64().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn envelope_has_schema_and_format() {
    let v = json(&["normal", "--z", "1.281"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["format"], "json");
    assert_eq!(v["records"].as_array().unwrap().len(), 1);
}

#[test]
fn normal_two_sided_example() {
    let v = json(&["normal", "--z", "1.281", "--sides", "2"]);
    assert!((first(&v, "ebf01") - 1.03).abs() < 0.01);
    assert_eq!(v["records"][0]["test"], "two_sided");
}

#[test]
fn normal_modes() {
    let one = json(&["normal", "--z", "5", "--sides", "1"]);
    assert!((first(&one, "ebf10") / 1.48e5 - 1.0).abs() < 0.01);
    let stent = json(&["normal", "--x", "16.6", "--se", "12.96", "--h0", "below:30", "--h1", "above:30"]);
    assert!((first(&stent, "ebf01") - 2.29).abs() < 0.01);
    let chi = json(&["normal", "--z2", "0", "--dim", "2"]);
    assert!((first(&chi, "ebf01") - 2.0 * 1f64.exp()).abs() < 1e-12);
    let dir = json(&["normal", "--z", "-1.5", "--directional"]);
    let back = json(&["normal", "--z", "1.5", "--directional"]);
    assert!((first(&dir, "ebf01_log") + first(&back, "ebf01_log")).abs() < 1e-12);
}

#[test]
fn pvalue_example() {
    let v = json(&["pvalue", "--p", "0.05"]);
    assert!((first(&v, "ebf01") - 0.487).abs() < 0.001);
    // Units are positive when the evidence favours H1, and EBF₁₀ > 1 here.
    assert!((first(&v, "units_of_evidence") - 0.5467).abs() < 0.001);
}

#[test]
fn bias_t_example() {
    let v = json(&["bias", "--family", "t", "--df", "1"]);
    assert!((first(&v, "bias") - 1.39).abs() < 0.005);
    assert_eq!(v["records"][0]["provenance"], "quadrature");
}

#[test]
fn bias_default_tables() {
    let v = json(&["bias", "--family", "binom"]);
    let rows = v["records"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!((rows[9]["bias"].as_f64().unwrap() - 0.447).abs() < 5e-4);
    let f = json(&["bias", "--family", "f", "--df1", "5", "--df2", "5"]);
    assert!((first(&f, "bias") - 0.5265).abs() < 0.005);
}

#[test]
fn csv_format_uses_ten_significant_digits() {
    let out = ebf(&["--format", "csv", "normal", "--z", "1.281"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("test,z,family,h0,h1,ebf01"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[5], "1.026436495");
}

#[test]
fn format_from_environment() {
    let out =
        Command::new(env!("CARGO_BIN_EXE_ebf")).args(["calibrate", "--units", "1"]).env("EBF_FORMAT", "csv").output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("units,ebf10,normal,chi2_2,chi2_3,nonparametric"));
}

#[test]
fn exit_codes() {
    assert_eq!(ebf(&["normal", "--z", "1", "--unknown"]).status.code(), Some(2));
    assert_eq!(ebf(&["pvalue", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(ebf(&["t", "--t", "1", "--df", "0.5"]).status.code(), Some(2));
    assert_eq!(ebf(&["normal", "--x", "1", "--se", "1", "--h1", "interval:2,1"]).status.code(), Some(2));
    let out = ebf(&["binom", "--successes", "5", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceed"));
    assert_eq!(ebf(&["--help"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_with_three() {
    // The negative-binomial series budget cannot reach this many successes.
    let out = ebf(&["binom", "--successes", "2000", "--trials", "4000", "--model", "negbinom"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-convergence"));
}

#[test]
fn malformed_csv_is_a_usage_error() {
    let out = ebf_stdin(&["multi", "--input", "-"], "id,estimate\na,1\n");
    assert_eq!(out.status.code(), Some(2));
    let out = ebf_stdin(&["multi", "--input", "-"], "id,estimate,se\na,1,oops\n");
    assert_eq!(out.status.code(), Some(2));
    let out = ebf_stdin(&["pvalue", "--input", "-"], "p\n0.05\nx\n");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn multi_csv_round_trip() {
    let input = "id,estimate,se\na,0.5,0.2\nb,-0.1,0.2\nc,0.9,0.3\nd,0.05,0.25\n";
    let first = ebf_stdin(&["--format", "csv", "multi", "--input", "-", "--pi-h", "0.5"], input);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let once = stdout(&first);
    let second = ebf_stdin(&["--format", "csv", "multi", "--input", "-", "--pi-h", "0.5"], &once);
    assert_eq!(once, stdout(&second));
}

#[test]
fn multi_single_test_matches_normal() {
    let out = ebf_stdin(&["multi", "--input", "-"], "id,estimate,se\nonly,0.6,0.25\n");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["records"][0];
    let single = json(&["normal", "--x", "0.6", "--se", "0.25"]);
    assert!((r["ebf01_log"].as_f64().unwrap() - first(&single, "ebf01_log")).abs() < 1e-12);
    assert!((r["single_ebf01"].as_f64().unwrap() - first(&single, "ebf01")).abs() < 1e-12);
    assert_eq!(r["rank"], 1);
}

#[test]
fn pvalue_batch_round_trip() {
    let first = ebf_stdin(&["--format", "csv", "pvalue", "--input", "-"], "p\n0.05\n0.001\n0.3\n");
    assert!(first.status.success());
    let once = stdout(&first);
    let second = ebf_stdin(&["--format", "csv", "pvalue", "--input", "-"], &once);
    assert_eq!(once, stdout(&second));
    assert_eq!(once.lines().count(), 4);
}

#[test]
fn json_numbers_round_trip_exactly() {
    let v = json(&["pvalue", "--p", "0.05"]);
    let e = first(&v, "ebf01_log");
    let direct = -(2.054451641f64).ln();
    assert!((e - direct).abs() < 1e-9);
    // Re-serializing the parsed value reproduces the same text.
    let text = serde_json::to_string(&v["records"][0]["ebf01_log"]).unwrap();
    assert_eq!(text.parse::<f64>().unwrap(), e);
}

#[test]
fn calibrate_and_curve() {
    let v = json(&["calibrate"]);
    let rows = v["records"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0]["normal"].as_f64().unwrap() - 0.038).abs() < 0.001);
    let c = json(&["curve", "--points", "11", "--p-min", "0.001", "--p-max", "0.1"]);
    let rows = c["records"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert!((rows[10]["p"].as_f64().unwrap() - 0.1).abs() < 1e-15);
}

#[test]
fn simulate_is_seeded() {
    let args = ["--format", "csv", "simulate", "--scenario", "2", "--m", "1,3", "--replicates", "200", "--seed", "7"];
    let a = stdout(&ebf(&args));
    assert_eq!(a, stdout(&ebf(&args)));
    assert_eq!(a.lines().count(), 3);
    let other = stdout(&ebf(&["--format", "csv", "simulate", "--scenario", "2", "--m", "1,3", "--replicates", "200", "--seed", "8"]));
    assert_ne!(a, other);
}

#[test]
fn simulate_other_studies() {
    let s = json(&["simulate", "--scenario", "largescale", "--m0", "90", "--m1", "10", "--table", "summary"]);
    assert!(first(&s, "rank_correlation") > 0.9);
    let n = json(&["simulate", "--scenario", "null-behaviour", "--replicates", "20000"]);
    assert!((first(&n, "exact") - 0.80681).abs() < 1e-5);
    let sens = json(&["simulate", "--scenario", "sensitivity", "--grid", "0,1"]);
    assert!((sens["records"][1]["ebf"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(ebf(&["simulate", "--scenario", "1", "--paper-scale", "--replicates", "5"]).status.code(), Some(2));
}

#[test]
fn help_names_the_formula() {
    let out = ebf(&["normal", "--help"]);
    assert!(stdout(&out).contains("√2·exp(−(z²−1)/2)"));
    let out = ebf(&["pvalue", "--help"]);
    assert!(stdout(&out).contains("ℓ = −log(1−p)"));
}
