//! End-to-end runs of the `twoproj` binary.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn twoproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoproj"))
        .args(args)
        .env_remove("TWOPROJ_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(out)).unwrap()
}

#[test]
fn sample_writes_sorted_rows() {
    let args = [
        "sample",
        "--N",
        "64",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
        "--fn",
        "pqp",
        "--samples",
        "20",
        "--seed",
        "7",
    ];
    let out = twoproj(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(
        header.starts_with("# ") && header.contains("N=64") && header.contains("seed=7"),
        "{header}"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        assert_eq!(row.len(), 64);
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
    }
    assert_eq!(twoproj(&args).stdout, out.stdout, "same seed, same bytes");
}

#[test]
fn sample_output_does_not_depend_on_threads() {
    let base = [
        "sample",
        "--N",
        "24",
        "--k",
        "7",
        "--l",
        "12",
        "--fn",
        "anticommutator",
        "--samples",
        "6",
        "--seed",
        "3",
    ];
    let one = twoproj(&[&["--threads", "1"], &base[..]].concat());
    let two = twoproj(&[&["--threads", "2"], &base[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn sample_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = twoproj(&[
        "sample",
        "--N",
        "8",
        "--k",
        "3",
        "--l",
        "4",
        "--fn",
        "linear",
        "--a",
        "1.5",
        "--b",
        "-0.7",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["N"], 8);
    assert_eq!(v["samples"].as_array().unwrap().len(), 1);
    assert_eq!(v["samples"][0].as_array().unwrap().len(), 8);
}

#[test]
fn limit_exports_half_half_law() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let out = twoproj(&[
        "limit",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
        "--fn",
        "pqp",
        "--grid",
        "1000",
        "--grid-csv",
        grid.to_str().unwrap(),
    ]);
    let v = json(&out);
    let atoms = v["atoms"].as_array().unwrap();
    let zero = atoms
        .iter()
        .find(|a| a[0].as_f64().unwrap() == 0.0)
        .unwrap();
    assert!((zero[1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["grid"].as_array().unwrap().len(), 1000);
    // Arcsine density (1/2)/(π√(x(1-x))) on the grid.
    for (x, d) in v["grid"]
        .as_array()
        .unwrap()
        .iter()
        .zip(v["density_values"].as_array().unwrap())
    {
        let (x, d) = (x.as_f64().unwrap(), d.as_f64().unwrap());
        if x > 0.0 && x < 1.0 {
            let want = 0.5 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt());
            assert!((d - want).abs() <= 1e-9 * want, "x={x}");
        }
    }
    let csv = fs::read_to_string(grid).unwrap();
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn rate_and_chi() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"atoms":[[0.0,0.4]],"cloud":[0.2,0.5,0.8],"cloud_mass":0.6}"#,
    )
    .unwrap();
    let out = twoproj(&[
        "rate",
        "--measure",
        bad.to_str().unwrap(),
        "--fn",
        "pqp",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), r#"{"rate":"+inf"}"#);

    let uniform: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
    let good = dir.path().join("good.json");
    let measure = serde_json::json!({"atoms": [[0.0, 0.5]], "cloud": uniform, "cloud_mass": 0.5});
    fs::write(&good, measure.to_string()).unwrap();
    let v = json(&twoproj(&[
        "rate",
        "--measure",
        good.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
    ]));
    let expected = 0.375 - std::f64::consts::LN_2 / 2.0;
    assert!((v["rate"].as_f64().unwrap() - expected).abs() <= 2e-3);

    let state = dir.path().join("state.json");
    let tau = serde_json::json!({"a11": 0.0, "a10": 0.0, "a01": 0.0, "a00": 0.0,
        "mu": {"atoms": [], "cloud": uniform, "cloud_mass": 1.0}});
    fs::write(&state, tau.to_string()).unwrap();
    let v = json(&twoproj(&["chi", "--state", state.to_str().unwrap()]));
    assert!((v["chi"].as_f64().unwrap() + expected).abs() <= 2e-3);

    let violated = dir.path().join("violated.json");
    let tau = serde_json::json!({"a11": 0.1, "a10": 0.0, "a01": 0.3, "a00": 0.1,
        "mu": {"atoms": [], "cloud": [0.5], "cloud_mass": 1.0}});
    fs::write(&violated, tau.to_string()).unwrap();
    let out = twoproj(&["chi", "--state", violated.to_str().unwrap()]);
    assert_eq!(stdout(&out).trim(), r#"{"chi":"-inf"}"#);
}

#[test]
fn verify_selberg_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = twoproj(&[
        "verify",
        "--suite",
        "selberg",
        "--seed",
        "7",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}

#[test]
fn verify_reports_failure() {
    // At N = 2 the two eigenangles sit at least 1/4 away from the uniform
    // CDF, far above the KS threshold.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"unitary_n": 2, "unitary_samples": 1}"#).unwrap();
    let out = twoproj(&[
        "verify",
        "--suite",
        "unitary_law",
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(twoproj(&["sample"]).status.code(), Some(2));
    assert_eq!(
        twoproj(&["verify", "--suite", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        twoproj(&["sample", "--N", "4", "--k", "5", "--l", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        twoproj(&[
            "limit", "--alpha", "0.5", "--beta", "0.5", "--fn", "linear", "--a", "0", "--b", "1"
        ])
        .status
        .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, "{not json").unwrap();
    assert_eq!(
        twoproj(&["verify", "--config", config.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        twoproj(&["chi", "--state", "/nonexistent/state.json"])
            .status
            .code(),
        Some(2)
    );
}
