use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn anomaly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anomaly"))
        .args(args)
        .env_remove("ANOMALY_THREADS")
        .output()
        .expect("spawn anomaly")
}

fn ok_json(args: &[&str]) -> Value {
    let out = anomaly(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn err_json(args: &[&str], code: i32) -> Value {
    let out = anomaly(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["exit_code"], code);
    v
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_centered_anderson() {
    let v = ok_json(&["classify", "--family", "anderson"]);
    assert_eq!(v["order"], 2);
    assert_eq!(v["degree"], "second");
    assert_eq!(v["type"], "diffusive");
    assert_eq!(v["param"], Value::Null);
    assert_eq!(v["atoms"].as_array().unwrap().len(), 4);
    assert!((v["min_mean_p2"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn dimer_perturbative_value() {
    let out = anomaly(&["gamma", "--mode", "perturbative", "--family", "dimer", "--param", "e=0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"value\": 0.2857142857"), "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["order"], "quadratic");
    assert!((v["value"].as_f64().unwrap() - 2.0 / 7.0).abs() < 1e-12);
}

#[test]
fn sweep_hyperbolic_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = anomaly(&[
        "sweep", "--family", "synthetic-hyperbolic", "--ladder", "0.04,0.02,0.01", "--steps", "200000",
        "--out", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 1.0).abs() < 0.1, "{fit}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,gamma,stderr,chains,steps,seed");
    assert_eq!(lines.len(), 4);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.04);
    assert_eq!(&first[3..], ["8", "200000", "1"]);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let p = dir.path().join(name);
        let out = anomaly(&[
            "sweep", "--family", "synthetic-elliptic", "--ladder", "0.2,0.1", "--steps", "20000", "--chains", "5",
            "--seed", "42", "--threads", threads, "--out", path_str(&p),
        ]);
        assert!(out.status.success());
        (std::fs::read(p).unwrap(), out.stdout)
    };
    assert_eq!(run("1", "a.csv"), run("3", "b.csv"));
    let d1 = anomaly(&["density", "--family", "anderson", "--param", "eps=0.3"]);
    let d2 = anomaly(&["density", "--family", "anderson", "--param", "eps=0.3"]);
    assert!(d1.status.success());
    assert_eq!(d1.stdout, d2.stdout);
    let g = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_anomaly"))
            .args(["gamma", "--mode", "mc", "--family", "dimer", "--steps", "20000", "--lambda", "0.1"])
            .env("ANOMALY_THREADS", t)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(g("1"), g("4"));
}

#[test]
fn density_csv_columns() {
    let out = anomaly(&["density", "--family", "anderson", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,rho0,kappa,K"));
    assert_eq!(lines.count(), 2048);
}

#[test]
fn config_file_with_inline_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("family.json");
    let out = anomaly(&["catalog", "synthetic-elliptic", "--param", "eta=3", "--out", path_str(&cfg)]);
    assert!(out.status.success());
    let from_cfg = ok_json(&["gamma", "--mode", "perturbative", "--config", path_str(&cfg)]);
    let direct = ok_json(&["gamma", "--mode", "perturbative", "--family", "synthetic-elliptic", "--param", "eta=3"]);
    assert_eq!(from_cfg, direct);

    let cfg2 = dir.path().join("run.json");
    std::fs::write(
        &cfg2,
        r#"{"family": {"inline": {"atoms": [
            {"weight": 0.5, "sign": 1, "P": [[0.5, -1], [1, -0.5]]},
            {"weight": 0.5, "sign": 1, "P": [[-0.5, -1], [1, 0.5]]}
        ]}}, "mode": "perturbative"}"#,
    )
    .unwrap();
    let v = ok_json(&["gamma", "--config", path_str(&cfg2)]);
    assert_eq!(v["type"], "elliptic");
    let w = ok_json(&[
        "gamma", "--mode", "perturbative", "--family", "synthetic-elliptic", "--param", "eta=2", "--param", "d=0.5",
    ]);
    assert!((v["value"].as_f64().unwrap() - w["value"].as_f64().unwrap()).abs() < 1e-12, "{v} {w}");
}

#[test]
fn exit_codes() {
    let v = err_json(&["classify", "--family", "no-such-family"], 2);
    assert_eq!(v["error"]["kind"], "validation");
    err_json(&["classify", "--family", "dimer", "--param", "x=1"], 2);
    err_json(&["classify", "--family", "dimer", "--kmax", "0"], 2);
    err_json(&["sweep", "--family", "dimer"], 2);
    err_json(&["sweep", "--family", "dimer", "--ladder", "0.01,0.02"], 2);
    err_json(&["gamma", "--family", "dimer", "--steps", "10"], 2);
    err_json(&["classify", "--bogus-flag"], 2);

    let v = err_json(&["classify", "--family", "dimer-iid"], 3);
    assert_eq!(v["error"]["error"], "not-an-anomaly");
    assert_eq!(v["error"]["details"]["is_critical_point"], true);
    err_json(&["density", "--family", "synthetic-hyperbolic", "--format", "csv"], 3);

    let dir = tempfile::tempdir().unwrap();
    err_json(&["classify", "--config", path_str(&dir.path().join("missing.json"))], 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family": {"catalog": "dimer"}, "lamda": 0.1}"#).unwrap();
    let v = err_json(&["classify", "--config", path_str(&bad)], 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("lamda"));

    let out = Command::new(env!("CARGO_BIN_EXE_anomaly"))
        .args(["classify", "--family", "dimer"])
        .env("ANOMALY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalog_listing() {
    let v = ok_json(&["catalog"]);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["anderson", "dimer", "synthetic-elliptic", "synthetic-diffusive"] {
        assert!(names.contains(&n), "{names:?}");
    }
    let v = ok_json(&["catalog", "synthetic"]);
    assert_eq!(v.as_array().unwrap().len(), 4);
}
