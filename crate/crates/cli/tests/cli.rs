use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const HEADER: &str = "eps,n_eps,area,centroid_re,centroid_im,directed_re,directed_im,closure_error_bound,points_used";

fn parafrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parafrac")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    parafrac(&args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const MINIMAL: &str = r#"{"germ": {"coefficients": [[1, 0], [1, 0]], "k": 1}}"#;

#[test]
fn analyze_minimal_quadratic_germ() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, MINIMAL);
    let out = tmp.path().join("results");
    let o = run("analyze", &cfg, &out, &["--threads", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("measurements.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        let mantissa = fields[0].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        assert!(fields[1].parse::<usize>().is_ok() && fields[8].parse::<usize>().is_ok());
    }

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["germ"]["k"], 1);
    assert_eq!(report["k_recovered"], 1);
    assert_eq!(report["invariants"]["series"]["source"], "series_oracle");
    assert_eq!(report["invariants"]["fractal"]["source"], "fractal_recovery");
    assert_eq!(report["degraded"], false);
}

#[test]
fn analyze_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "eps_grid": {"min": 1e-5, "max": 1e-3, "count": 12},
            "oracle": {"enabled": true, "samples": 20000, "seed": 11}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("analyze", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run("analyze", &cfg, &b, &["--threads", "2"]).status.code(), Some(0));
    for name in ["measurements.csv", "report.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn malformed_json_fails_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, r#"{"germ": {"coefficients": [[1, 0], [1, 0]"#);
    let out = tmp.path().join("results");
    let o = run("analyze", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));
    assert!(!out.exists());
}

#[test]
fn invalid_configs_are_rejected() {
    let cases = [
        r#"{"germ": {"coefficients": [[2, 0], [1, 0]]}}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]], "k": 2}}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "eps_grid": {"min": 1e-3, "max": 1e-5, "count": 64}}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "eps_grid": {"min": 1e-5, "max": 1e-3, "count": 4}}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "eps_grid": {"min": 1e-5, "max": 1e-3, "count": 9, "spacing": "cubic"}}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "budget": -1}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "colour": "blue"}"#,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "verify": {"conjugators": [[[2, 0]]]}}"#,
    ];
    for text in cases {
        let tmp = TempDir::new().unwrap();
        let cfg = write_config(&tmp, text);
        let out = tmp.path().join("results");
        let o = run("analyze", &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(!out.exists(), "{text}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(parafrac(&["analyze"]).status.code(), Some(1));
    assert_eq!(parafrac(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(parafrac(&["--version"]).status.code(), Some(0));
}

#[test]
fn dry_run_prints_orbit_estimate() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, MINIMAL);
    let out = tmp.path().join("results");
    let o = run("analyze", &cfg, &out, &["--dry-run"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout.lines().find(|l| l.starts_with("orbit length estimate")).expect("estimate printed");
    let n: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(n > 1e4 && n < 1e6, "{line}");
    assert!(!out.exists());
}

#[test]
fn verify_identity_scaling_and_tangent_conjugator() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        r#"{"germ": {"coefficients": [[1, 0], [1, 0]]},
            "verify": {"conjugators": [[[1, 0]], [[1, 0], [3, 0]]], "lambda": [2, 0]}}"#,
    );
    let out = tmp.path().join("results");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("invariance.json"));
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    let inv = &report["invariance"];
    assert_eq!(inv["holds"], true);

    let identity = &inv["conjugates"][0];
    for key in ["dim_b_deviation", "m_c_relative_deviation", "r_c_deviation"] {
        assert_eq!(identity[key].as_f64().unwrap(), 0.0, "{key}");
    }
    assert_eq!(inv["conjugates"][1]["agrees"], true);

    let s = &inv["scaling"];
    assert!(s["dim_b_deviation"].as_f64().unwrap() < 1e-6);
    let (ratio, expected) = (s["content_ratio"].as_f64().unwrap(), s["expected_ratio"].as_f64().unwrap());
    assert!((expected - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((ratio / expected - 1.0).abs() < 0.02);
    assert_eq!(report["invariants"]["fractal"]["k"], 1);
}

const ORACLE: &str = r#"{"germ": {"coefficients": [[1, 0], [1, 0]]}, "z0": [-0.5, 0],
    "eps_grid": {"min": 3e-4, "max": 1e-2, "count": 8}, "oracle": {"samples": SAMPLES}}"#;

#[test]
fn oracle_check_passes_on_default_settings() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, MINIMAL);
    let out = tmp.path().join("results");
    let o = run("oracle-check", &cfg, &out, &["--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("oracle.json"));
    assert_eq!(report["oracle"]["seed"], 7);
    assert_eq!(report["oracle"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn oracle_check_with_few_samples_still_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &ORACLE.replace("SAMPLES", "1000"));
    let out = tmp.path().join("results");
    let o = run("oracle-check", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("oracle.json"));
    assert_eq!(report["oracle"]["requested_samples"], 1000);
}

#[test]
fn corrupted_exact_value_is_an_oracle_mismatch() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &ORACLE.replace("SAMPLES", "1000000"));
    let out = tmp.path().join("results");
    let o = run("oracle-check", &cfg, &out, &["--corrupt-exact", "1.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(read_json(&out.join("oracle.json"))["oracle"]["pass"], false);
}
