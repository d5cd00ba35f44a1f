//! End-to-end behavior of the `mesinar` binary: formats, determinism, and
//! the exit-code contract (0 success, 2 input/config error, 3 numerical
//! non-convergence).

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mesinar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parse a machine-format report into a key -> value map.
fn kv(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.trim_matches('"').to_string()))
        .collect()
}

fn write_csv(path: &Path, values: &[i64]) {
    let mut body = String::from("t,z\n");
    for (t, z) in values.iter().enumerate() {
        body.push_str(&format!("{t},{z}\n"));
    }
    std::fs::write(path, body).unwrap();
}

#[test]
fn simulate_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "simulate".into(),
            "--phi".into(),
            "0.8".into(),
            "--p".into(),
            "0.5".into(),
            "--beta".into(),
            "2.2360679".into(),
            "--theta1".into(),
            "10".into(),
            "--theta2".into(),
            "10".into(),
            "--delta".into(),
            "1".into(),
            "--n".into(),
            "1000".into(),
            "--seed".into(),
            "7".into(),
            "--output".into(),
            out.display().to_string(),
        ]
    };
    let out = bin().args(args(&a)).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let out = bin().args(args(&b)).output().unwrap();
    assert!(out.status.success());
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same invocation must be byte-identical");
    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("t,z\n"));
}

#[test]
fn simulate_rejects_out_of_range_phi_naming_it() {
    let out = run(&[
        "simulate", "--phi", "1.5", "--p", "0.5", "--beta", "1.0", "--theta1", "1", "--theta2",
        "1", "--delta", "1", "--n", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("phi"), "{}", stderr(&out));
}

#[test]
fn diff_output_and_short_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_csv(&input, &[5, 3, 7]);
    let out = run(&["diff", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "t,z\n1,-2\n2,4\n");

    // Constant series of length 10 differences to nine zeros.
    write_csv(&input, &[4; 10]);
    let out = run(&["diff", "--input", input.to_str().unwrap()]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));

    write_csv(&input, &[5]);
    let out = run(&["diff", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn describe_simple_series() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_csv(&input, &[1, 2, 3]);
    let out = run(&["describe", "--input", input.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    let map = kv(&stdout(&out));
    assert_eq!(map["n"], "3");
    assert_eq!(map["mean"], "2");
    assert_eq!(map["variance"], "1");
    assert_eq!(map["minimum"], "1");
    assert_eq!(map["median"], "2");
    assert_eq!(map["maximum"], "3");
    assert_eq!(map["range"], "2");

    // Single observation: range 0.
    write_csv(&input, &[7]);
    let out = run(&["describe", "--input", input.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(kv(&stdout(&out))["range"], "0");

    // Empty file (header only).
    std::fs::write(&input, "t,z\n").unwrap();
    let out = run(&["describe", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn describe_rejects_malformed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "t,z\n0,1\n1,oops\n").unwrap();
    let out = run(&["describe", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));

    std::fs::write(&input, "time,value\n0,1\n").unwrap();
    let out = run(&["describe", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("t,z"), "{}", stderr(&out));
}

#[test]
fn fit_round_trip_recovers_truth_at_desk_scale() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("sim.csv");
    let out = run(&[
        "simulate", "--phi", "0.2", "--p", "0.4", "--beta", "2", "--theta1", "9", "--theta2",
        "7", "--delta", "1", "--n", "4000", "--seed", "11", "--output",
        series.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "fit", "--input", series.to_str().unwrap(), "--model", "mesinar", "--format", "machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let map = kv(&stdout(&out));
    assert_eq!(map["delta"], "1");
    assert_eq!(map["converged"], "true");
    let phi: f64 = map["phi"].parse().unwrap();
    let p: f64 = map["p"].parse().unwrap();
    let t1: f64 = map["theta1"].parse().unwrap();
    let t2: f64 = map["theta2"].parse().unwrap();
    assert!((phi - 0.2).abs() < 0.06, "phi = {phi}");
    assert!((p - 0.4).abs() < 0.09, "p = {p}");
    assert!((t1 - 9.0).abs() < 0.9, "t1 = {t1}");
    assert!((t2 - 7.0).abs() < 0.9, "t2 = {t2}");
    assert!(map.contains_key("se_phi"));

    // Yule-Walker through the same entry point (auto CML pre-fit).
    let out = run(&[
        "fit", "--input", series.to_str().unwrap(), "--method", "yw", "--format", "machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let map = kv(&stdout(&out));
    assert_eq!(map["method"], "yw");
    assert!(!map.contains_key("se_phi"));
    let phi_yw: f64 = map["phi"].parse().unwrap();
    assert!((phi_yw - phi).abs() < 0.1, "yw phi = {phi_yw} vs cml {phi}");
}

#[test]
fn fit_reports_best_point_and_exits_3_when_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("sim.csv");
    let out = run(&[
        "simulate", "--phi", "0.5", "--p", "0.5", "--beta", "1.5", "--theta1", "5", "--theta2",
        "5", "--delta", "1", "--n", "500", "--seed", "3", "--output", series.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = dir.path().join("fit.txt");
    let out = run(&[
        "fit",
        "--input",
        series.to_str().unwrap(),
        "--max-iter",
        "1",
        "--starts",
        "1",
        "--format",
        "machine",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    let map = kv(&text);
    assert_eq!(map["converged"], "false");
    assert!(map.contains_key("loglik"));
}

#[test]
fn compare_single_model_and_unknown_model() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("sim.csv");
    let out = run(&[
        "simulate", "--phi", "0.4", "--p", "0.5", "--beta", "1.5", "--theta1", "4", "--theta2",
        "4", "--delta", "1", "--n", "600", "--seed", "5", "--output", series.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "compare", "--input", series.to_str().unwrap(), "--models", "mesinar", "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let map = kv(&stdout(&out));
    assert_eq!(map["ranking"], "mesinar");
    assert!(map.contains_key("mesinar_aic"));

    let out = run(&[
        "compare", "--input", series.to_str().unwrap(), "--models", "arma",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("arma"));
}

#[test]
fn mcstudy_smoke_config_is_fast_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(
        &config,
        "phi = 0.5\np = 0.5\nbeta = 1.5\ntheta1 = 4.0\ntheta2 = 4.0\ndelta = 1\n\
         sample_sizes = [50]\nreplications = 1\nseed = 12\nmethods = [\"cml\", \"yw\"]\nburn_in = 50\n",
    )
    .unwrap();
    let started = std::time::Instant::now();
    let out1 = run(&["mcstudy", "--config", config.to_str().unwrap(), "--format", "machine"]);
    assert!(out1.status.success(), "{}", stderr(&out1));
    assert!(started.elapsed().as_secs() < 10, "smoke config exceeded 10 s");
    let out2 = run(&["mcstudy", "--config", config.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(stdout(&out1), stdout(&out2), "report must be bit-identical");
    let map = kv(&stdout(&out1));
    assert!(map.contains_key("cml_50_phi_mean"));
    assert!(map.contains_key("yw_50_theta1_mean"));
}

#[test]
fn mcstudy_rejects_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(
        &config,
        "phi = 0.5\np = 0.5\nbeta = 1.5\ntheta1 = 4.0\ntheta2 = 4.0\ndelta = 1\n\
         sample_sizes = [50]\nreplications = 1\nseed = 12\nmethods = [\"cml\"]\nreps = 4\n",
    )
    .unwrap();
    let out = run(&["mcstudy", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("reps"), "{}", stderr(&out));
}

#[test]
fn fit_accepts_options_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("sim.csv");
    let out = run(&[
        "simulate", "--phi", "0.4", "--p", "0.5", "--beta", "1.5", "--theta1", "4", "--theta2",
        "4", "--delta", "1", "--n", "400", "--seed", "21", "--output", series.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let cfg = dir.path().join("fit.toml");
    std::fs::write(&cfg, "max_iterations = 300\nn_starts = 3\ngradient_tolerance = 1e-6\n").unwrap();
    let out = run(&[
        "fit", "--input", series.to_str().unwrap(), "--config", cfg.to_str().unwrap(),
        "--format", "machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(kv(&stdout(&out))["converged"], "true");

    // Unknown option keys are rejected with exit 2.
    std::fs::write(&cfg, "max_iterations = 300\nwarm_start = true\n").unwrap();
    let out = run(&[
        "fit", "--input", series.to_str().unwrap(), "--config", cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("warm_start"), "{}", stderr(&out));
}

#[test]
fn text_format_reports_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_csv(&input, &[1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0]);
    let out = run(&["describe", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mean") && text.contains("variance") && text.contains("range"));

    let series = dir.path().join("sim.csv");
    let out = run(&[
        "simulate", "--phi", "0.4", "--p", "0.5", "--beta", "1.5", "--theta1", "4", "--theta2",
        "4", "--delta", "1", "--n", "600", "--seed", "2", "--burn-in", "0", "--output",
        series.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["fit", "--input", series.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("log-likelihood"));
    assert!(text.contains("AIC") && text.contains("HQIC"));
    assert!(text.contains("signed p"));
}

#[test]
fn absurd_state_values_are_rejected_at_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "t,z\n0,1\n1,9000000000\n").unwrap();
    let out = run(&["describe", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("supported range"), "{}", stderr(&out));
}
