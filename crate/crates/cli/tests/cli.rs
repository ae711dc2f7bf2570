//! Black-box tests of the `onsager` binary: artifact contents, exit
//! codes, config-file merging and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PI: f64 = std::f64::consts::PI;

fn onsager(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onsager"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parse `lambda` out of a spectrum CSV row for the given l.
fn lambda_from_csv(csv: &str, ell: usize) -> f64 {
    let row = csv
        .lines()
        .find(|l| l.starts_with(&format!("{ell},")))
        .unwrap_or_else(|| panic!("row {ell} in:\n{csv}"));
    row.split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn spectrum_maier_saupe_values() {
    let out = onsager(&["spectrum", "--potential", "maier-saupe", "--lmax", "6"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("# config: {"));
    assert!((lambda_from_csv(&csv, 0) - 4.0 / 3.0).abs() < 1e-10);
    assert!((lambda_from_csv(&csv, 2) + 4.0 / 15.0).abs() < 1e-10);
    for ell in [1, 3, 4, 5, 6] {
        assert!(lambda_from_csv(&csv, ell).abs() < 1e-10);
    }
}

#[test]
fn spectrum_onsager_values_with_closed_form_column() {
    let out = onsager(&[
        "spectrum",
        "--potential",
        "onsager",
        "--lmax",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let l2 = rows[2]["lambda"].as_f64().unwrap();
    let l4 = rows[4]["lambda"].as_f64().unwrap();
    assert!((l2 + PI / 16.0).abs() < 1e-10);
    assert!((l4 + PI / 128.0).abs() < 1e-10);
    // closed-form cross-check column is present for onsager
    assert!((rows[4]["closed_form"].as_f64().unwrap() + PI / 128.0).abs() < 1e-12);
    assert_eq!(v["config"]["potential"], "onsager");
}

#[test]
fn missing_table_is_a_config_error() {
    let out = onsager(&["spectrum", "--potential", "table:missing.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_potential_is_a_config_error() {
    let out = onsager(&["spectrum", "--lmax", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_range_is_a_config_error() {
    let out = onsager(&[
        "scan",
        "--potential",
        "maier-saupe",
        "--rho-min",
        "5",
        "--rho-max",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = onsager(&["solve", "--potential", "maier-saupe"]);
    assert_eq!(out.status.code(), Some(2), "solve without --rho");
    let out = onsager(&["spectrum", "--potential", "onsager", "--lmax", "64", "--nodes", "32"]);
    assert_eq!(out.status.code(), Some(2), "lmax beyond nodes");
}

#[test]
fn certify_onsager_first_order() {
    let out = onsager(&["certify", "--potential", "onsager", "--beta", "1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cert = &v["certificate"];
    assert!((cert["rho_star"].as_f64().unwrap() - 64.0).abs() < 1e-6);
    assert_eq!(cert["verdict"], "first-order");
    assert_eq!(cert["ell_star"], 2);
}

#[test]
fn certify_maier_saupe_beta_two() {
    let out = onsager(&["certify", "--potential", "maier-saupe", "--beta", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rho_star = v["certificate"]["rho_star"].as_f64().unwrap();
    assert!((rho_star - 7.5 * PI).abs() < 1e-8);
}

#[test]
fn certify_odd_potential_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("odd.txt");
    let mut text = String::from("# odd test potential\n");
    for i in 0..=64 {
        let u = -1.0 + 2.0 * i as f64 / 64.0;
        text.push_str(&format!("{u:.17} {u:.17}\n"));
    }
    std::fs::write(&table, text).unwrap();
    let tag = format!("table:{}", table.display());
    let out = onsager(&["certify", "--potential", &tag]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["certificate"]["verdict"], "inconclusive-cubic-zero");
    assert_eq!(v["certificate"]["cubic_coefficient"].as_f64().unwrap(), 0.0);
}

#[test]
fn solve_reports_ordered_branch() {
    let out = onsager(&[
        "solve",
        "--potential",
        "maier-saupe",
        "--rho",
        "8",
        "--nodes",
        "64",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["converged"].as_bool().unwrap());
    assert!(v["order_parameter"].as_f64().unwrap() > 0.4);
}

#[test]
fn config_file_merging_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"potential": "maier-saupe", "lmax": 6, "beta": 2.0}"#,
    )
    .unwrap();
    // flag overrides the file's beta; potential and lmax come from the file
    let out = onsager(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--beta",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["config"]["beta"].as_f64().unwrap(), 1.0);
    assert_eq!(v["config"]["lmax"], 6);
    let rho_star = v["certificate"]["rho_star"].as_f64().unwrap();
    assert!((rho_star - 15.0 * PI).abs() < 1e-6);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"unknown-key": 1}"#).unwrap();
    let out = onsager(&["certify", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn run_scan_artifacts(dir: &Path, name: &str) -> (String, String) {
    let csv = dir.join(name);
    let out = onsager(&[
        "scan",
        "--potential",
        "maier-saupe",
        "--rho-min",
        "6",
        "--rho-max",
        "8",
        "--rho-steps",
        "5",
        "--nodes",
        "48",
        "--lmax",
        "12",
        "--threads",
        "1",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // bracket and rho_star are reported on standard output
    let text = stdout(&out);
    assert!(text.contains("rho_c_bracket:"));
    assert!(text.contains("rho_star:"));
    let sidecar = csv.with_extension("summary.json");
    (
        std::fs::read_to_string(&csv).unwrap(),
        std::fs::read_to_string(&sidecar).unwrap(),
    )
}

#[test]
fn scan_artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (csv1, json1) = run_scan_artifacts(dir.path(), "a.csv");
    let (csv2, json2) = run_scan_artifacts(dir.path(), "b.csv");
    assert_eq!(csv1, csv2);
    assert_eq!(json1, json2);
    assert!(csv1.starts_with("# config: {"));
    assert!(csv1.contains("rho,F_uniform,F_best,order_param,branch,converged"));
    let v: Value = serde_json::from_str(&json1).unwrap();
    assert_eq!(v["config"]["command"], "scan");
    assert!(v["scan"]["rho_c_bracket"].is_array() || v["scan"]["rho_c_bracket"].is_null());
}
