//! End-to-end checks of the command line binary: published sweep shapes,
//! byte determinism, exit codes, JSON schemas, and file round-trips.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn run_with(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trace-lab"));
    cmd.args(args);
    cmd.env_remove("TRACE_LAB_THREADS");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn profile_sweep_matches_the_published_shape() {
    let out = run(&[
        "profile", "--op", "t0", "--kind", "dixmier", "--coord", "u", "--range", "0..12",
        "--spu", "64",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 770, "header plus 769 data rows");
    assert_eq!(lines[0], "coord_name,coord_value,value,value_logmag,provenance");
    let row = lines
        .iter()
        .find(|l| l.starts_with("u,1.0000000000000000e1,"))
        .expect("grid row at u = 10");
    let value: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    let allowance = 5.0 * (-10.0f64).exp();
    assert!((value - 1.5819767068693265).abs() <= allowance);
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));
}

#[test]
fn zeta_sweep_is_monotone_toward_one() {
    let out = run(&["profile", "--op", "harmonic", "--kind", "zeta", "--range", "r=10..10000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(values.len() > 100);
    for pair in values.windows(2) {
        assert!(pair[1] <= pair[0], "g(r) decreases toward its residue");
    }
    let last = *values.last().unwrap();
    assert!(last > 1.0 && last - 1.0 < 2e-4);
}

#[test]
fn identical_configs_produce_byte_identical_output() {
    let args = [
        "profile", "--op", "t0", "--kind", "truncated", "--range", "0..9", "--spu", "48",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let capped = run_with(&args, &[("TRACE_LAB_THREADS", "1")]);
    let wide = run_with(
        &["--threads", "8", "profile", "--op", "t0", "--kind", "truncated", "--range", "0..9",
          "--spu", "48"],
        &[("TRACE_LAB_THREADS", "6")],
    );
    assert_eq!(first.stdout, capped.stdout);
    assert_eq!(first.stdout, wide.stdout);
    let verdict_a = run(&["verdict", "--op", "t0", "--class", "dp"]);
    let verdict_b = run(&["verdict", "--op", "t0", "--class", "dp"]);
    assert_eq!(verdict_a.stdout, verdict_b.stdout);
}

#[test]
fn failures_use_the_documented_exit_codes_and_keep_stdout_clean() {
    let empty = run(&["profile", "--op", "t0", "--range", "5..5"]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(stdout(&empty).is_empty());
    let unknown = run(&["profile", "--op", "greeble", "--range", "0..2"]);
    assert_eq!(unknown.status.code(), Some(2));
    let spectrumless = run(&["lidskii", "--op", "harmonic"]);
    assert_eq!(spectrumless.status.code(), Some(4));
    assert!(stdout(&spectrumless).is_empty());
    let beyond_depth = run(&["profile", "--op", "t0", "--range", "0..35"]);
    assert_eq!(beyond_depth.status.code(), Some(3));
    assert!(stdout(&beyond_depth).is_empty(), "no partial CSV on stdout");
    assert!(!stderr(&beyond_depth).contains("coord_value"), "no CSV on stderr");
    let bad_thresholds = run(&["--thresholds", "loose", "accept", "--criterion", "5"]);
    assert_eq!(bad_thresholds.status.code(), Some(2));
    let bad_criterion = run(&["accept", "--criterion", "99"]);
    assert_eq!(bad_criterion.status.code(), Some(2));
    let bad_env = run_with(
        &["profile", "--op", "t0", "--range", "0..1"],
        &[("TRACE_LAB_THREADS", "zero")],
    );
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn verdict_json_reports_the_expected_kinds_and_values() {
    let osc = run(&["verdict", "--op", "t0", "--class", "dixmier"]);
    assert!(osc.status.success());
    let osc_json: serde_json::Value = serde_json::from_str(&stdout(&osc)).unwrap();
    assert_eq!(osc_json["kind"], "oscillating");
    let limsup = osc_json["limsup"].as_f64().unwrap();
    assert!((limsup - 1.5819767068693265).abs() < 1e-6);
    assert!(osc_json["liminf"].as_f64().unwrap() < limsup - 0.5);

    let dp = run(&["verdict", "--op", "t0", "--class", "dp"]);
    assert!(dp.status.success());
    let dp_json: serde_json::Value = serde_json::from_str(&stdout(&dp)).unwrap();
    assert_eq!(dp_json["kind"], "periodic-mean");
    assert!((dp_json["value"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!((dp_json["period"].as_f64().unwrap() - 1.0).abs() <= 1e-9);

    let conv = run(&["verdict", "--op", "harmonic", "--class", "dixmier"]);
    assert!(conv.status.success());
    let conv_json: serde_json::Value = serde_json::from_str(&stdout(&conv)).unwrap();
    assert_eq!(conv_json["kind"], "convergent");
    assert!((conv_json["value"].as_f64().unwrap() - 1.0).abs() <= 1e-3);
}

#[test]
fn emitted_operator_files_reproduce_catalog_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t0_12.json");
    let emit = run(&[
        "gallery", "emit", "t0", "--param", "k_max=12", "--out", path.to_str().unwrap(),
    ]);
    assert!(emit.status.success(), "{}", stderr(&emit));
    let from_file = run(&["profile", "--op", path.to_str().unwrap(), "--range", "0..8"]);
    let from_catalog = run(&["profile", "--op", "t0", "--range", "0..8"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, from_catalog.stdout);
}

#[test]
fn lidskii_emits_rows_plus_summary_on_separate_streams() {
    let out = run(&["lidskii", "--op", "random", "--samples", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 51);
    assert!(lines[0].starts_with("ell,circle_re,circle_im,rect_re,rect_im,"));
    assert!(lines[1].ends_with(",true"));
    let summary: serde_json::Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(summary["scales"], 50);
    assert_eq!(summary["all_within_bounds"], true);
    assert!(summary["max_slack_circle_rect"].as_f64().unwrap() <= 1.0);
}

#[test]
fn show_config_reports_the_resolved_values() {
    let out = run(&["--show-config", "--thresholds", "strict=10x", "accept"]);
    assert!(out.status.success());
    let cfg: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cfg["spu"], 64);
    assert_eq!(cfg["samples"], 200);
    assert_eq!(cfg["strict_divisor"], 10.0);
}

#[test]
fn config_file_feeds_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lab.json");
    std::fs::write(&path, r#"{"spu": 16}"#).unwrap();
    let from_file = run(&[
        "profile", "--op", "t0", "--range", "0..2", "--config", path.to_str().unwrap(),
    ]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file).lines().count(), 34, "16 per unit over 2 units");
    let overridden = run(&[
        "profile", "--op", "t0", "--range", "0..2", "--config", path.to_str().unwrap(),
        "--spu", "32",
    ]);
    assert_eq!(stdout(&overridden).lines().count(), 66, "flag beats file");
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"speed": 9}"#).unwrap();
    let rejected = run(&[
        "profile", "--op", "t0", "--range", "0..2", "--config", broken.to_str().unwrap(),
    ]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn accept_command_reports_single_criteria() {
    let out = run(&["accept", "--criterion", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("PASS"));
    assert!(text.contains("oscillator-unit-mean"));
    let strict = run(&["--thresholds", "strict=10x", "accept", "--criterion", "1"]);
    assert!(strict.status.success());
}
