use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resolvent-decay"))
}

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn kernel_yukawa_row() {
    let m = model("euclidean3.json");
    let out = run(&["kernel", "--model", m.to_str().unwrap(), "--lambda", "1", "--rmax", "30"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0], ["r", "u", "du", "log_u"]);
    let row = rows.iter().skip(1).find(|r| r[0].parse::<f64>().unwrap() == 2.0).unwrap();
    let u: f64 = row[1].parse().unwrap();
    let exact = (-2.0f64).exp() / (8.0 * std::f64::consts::PI);
    assert!((u - exact).abs() / exact < 1e-7);
}

#[test]
fn output_is_deterministic_and_fans_out() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("h3.json");
    let base = dir.path().join("sums.csv");
    for _ in 0..2 {
        let out = run(&["sums", "--model", m.to_str().unwrap(), "--lambda", "0.5,2", "--out", base.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("sums_lambda=0.5.csv")).unwrap();
    let b = std::fs::read(dir.path().join("sums_lambda=2.csv")).unwrap();
    assert_ne!(a, b);
    let again = dir.path().join("again.csv");
    run(&["sums", "--model", m.to_str().unwrap(), "--lambda", "0.5", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&again).unwrap(), a);
    assert!(!base.exists());
}

#[test]
fn json_mirrors_csv() {
    let m = model("damek_ricci_m2k1.json");
    let csv = run(&["bounds", "--model", m.to_str().unwrap(), "--lambda", "1", "--r0", "2"]);
    let json = run(&["bounds", "--model", m.to_str().unwrap(), "--lambda", "1", "--r0", "2", "--format", "json"]);
    assert!(csv.status.success() && json.status.success());
    let rows = csv_rows(&String::from_utf8(csv.stdout).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["lambda"], 1.0);
    assert_eq!(doc["config"]["descriptor"]["type"], "damek_ricci");
    let cols: Vec<&str> = doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cols, ["r", "psi_bar", "bound_envelope", "bound_uniform", "lower_bound", "ratio"]);
    assert_eq!(rows[0], cols);
    let jrows = doc["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len() - 1);
    for (c, j) in rows.iter().skip(1).zip(jrows).step_by(37) {
        for k in 0..6 {
            assert_eq!(c[k].parse::<f64>().unwrap(), j[k].as_f64().unwrap());
        }
        // ratio <= 1 is the main bound
        assert!(j[5].as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn rates_table_for_h3() {
    let m = model("h3.json");
    let out = run(&["rates", "--model", m.to_str().unwrap(), "--lambda", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = csv_rows(&text);
    let get = |q: &str| rows.iter().find(|r| r[0] == q).unwrap()[4].parse::<f64>().unwrap();
    assert!((get("pointwise") - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    assert!((get("spherical_sum") - (2f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn bessel_command() {
    let out = run(&["bessel", "--nu", "0.5", "--x", "2"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let k: f64 = rows[1][2].parse().unwrap();
    let exact = (std::f64::consts::PI / 4.0).sqrt() * (-2.0f64).exp();
    assert!((k - exact).abs() / exact < 1e-14);
}

#[test]
fn exit_codes() {
    let m = model("h3.json");
    let ms = m.to_str().unwrap();
    assert_eq!(run(&["kernel", "--model", "/nonexistent.json", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--model", ms, "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--model", ms, "--lambda", "1", "--grid", "10"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--model", ms, "--lambda", "1", "--r0", "5", "--rmax", "4"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"type": "euclidean", "dimension": 3, "colour": 1}"#).unwrap();
    assert_eq!(run(&["kernel", "--model", bad.to_str().unwrap(), "--lambda", "1"]).status.code(), Some(2));

    // matching at an absurdly small grid extent fails numerically
    assert_eq!(
        run(&["kernel", "--model", ms, "--lambda", "1e300"]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let out = run(&["verify", "--suite", "all", "--out", report.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r[4] == "true"));
}
