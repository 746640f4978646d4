use std::fs;

use nlkg_kam::hamalg::{parse_hamiltonian, write_hamiltonian};
use nlkg_kam_cli::{dispatch, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("nlkg-kam").chain(args.iter().copied()))
}

fn write_config(dir: &TempDir, body: &str) -> String {
    let p = dir.path().join("model.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
    assert_eq!(run(&["norm", "--in", "x.txt"]), EXIT_USAGE);
    assert_eq!(run(&["resonance", "--gamma", "abc"]), EXIT_USAGE);
    assert_eq!(run(&["--threads", "0", "resonance", "--gamma", "1e-3", "--samples", "1"]), EXIT_USAGE);
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]), EXIT_OK);
    assert_eq!(run(&["kam-run", "--help"]), EXIT_OK);
}

#[test]
fn build_then_norm() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"c":1,"eps":1e-6,"N_max":3}"#);
    let h = path(&dir, "h.txt");
    let r = path(&dir, "r.txt");
    assert_eq!(run(&["build", "--config", &cfg, "--out", &h, "--remainder", &r]), EXIT_OK);
    let text = fs::read_to_string(&h).unwrap();
    let parsed = parse_hamiltonian(&text).unwrap();
    assert_eq!(write_hamiltonian(&parsed), text);
    assert!(parsed.len() > fs::read_to_string(&r).unwrap().lines().count() - 1);
    assert_eq!(run(&["norm", "--in", &r, "--rho", "0.01"]), EXIT_OK);
}

#[test]
fn invalid_configs_are_domain_errors() {
    let dir = TempDir::new().unwrap();
    let h = path(&dir, "h.txt");
    let cfg = write_config(&dir, r#"{"c":0.5,"eps":1e-6}"#);
    assert_eq!(run(&["build", "--config", &cfg, "--out", &h]), EXIT_DOMAIN);
    let cfg = write_config(&dir, r#"{"c":1,"eps":1e-6,"N_max":2,"V":[0.5]}"#);
    assert_eq!(run(&["build", "--config", &cfg, "--out", &h]), EXIT_DOMAIN);
    let cfg = write_config(&dir, "{ not json");
    assert_eq!(run(&["build", "--config", &cfg, "--out", &h]), EXIT_DOMAIN);
    assert_eq!(run(&["build", "--config", &path(&dir, "missing.json")]), EXIT_DOMAIN);
    let cfg = write_config(&dir, r#"{"c":1,"eps":1e-6}"#);
    let bad = path(&dir, "no/such/dir/h.txt");
    assert_eq!(run(&["build", "--config", &cfg, "--out", &bad]), EXIT_DOMAIN);
    assert!(!dir.path().join("h.txt").exists());
}

#[test]
fn kam_run_writes_report_and_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"c":1,"eps":1e-6,"N_max":3,"V":{"seed":1},"seed":5}"#);
    let out = path(&dir, "report.json");
    let csv = path(&dir, "trace.csv");
    assert_eq!(
        run(&["kam-run", "--config", &cfg, "--gamma", "1e-3", "--steps", "2", "--out", &out, "--csv", &csv]),
        EXIT_OK
    );
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], "completed");
    assert_eq!(report["config"]["steps"], 2);
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["gamma"], 1e-3);
    assert_eq!(report["config"]["V"].as_array().unwrap().len(), 7);
    let trace = report["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 2);
    for key in ["s", "norm_r0", "norm_r1", "norm_r2", "shift_inf", "vstar_delta_inf", "phi_size"] {
        assert!(trace[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["decay_exponents"].as_array().unwrap().len(), 2);
    assert!(report.get("torus_residual").is_some());
    let rows: Vec<_> = fs::read_to_string(&csv).unwrap().lines().map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("s,rho,eps,norm_r0"));
}

#[test]
fn resonance_writes_estimate() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "measure.json");
    let args = [
        "resonance", "--c", "1", "--gamma", "1e-3", "--samples", "200", "--support", "3", "--height", "2", "--n3max",
        "3", "--seed", "1", "--out", &out,
    ];
    assert_eq!(run(&args), EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["fraction", "stderr", "samples", "budget", "gamma", "c"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["samples"], 200);
}
