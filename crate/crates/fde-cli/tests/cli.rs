use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fde(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fde"));
    cmd.args(args).env_remove("FDE_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("fde runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, value: &Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn constants_prints_json() {
    let out = fde(&["constants", "--m", "0.25", "--beta", "-2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "constants");
    assert_eq!(v["params"]["m"], 0.25);
    assert_eq!(v["params"]["beta"], -2.0);
    assert!(v["constants"]["mu1"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(fde(&["constants", "--bogus"], &[]).status.code(), Some(1));
    assert_eq!(fde(&["constants", "--m", "0.5"], &[]).status.code(), Some(1));
    // A flag that the subcommand does not use is refused rather than ignored.
    let out = fde(&["constants", "--dt", "0.1"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dt"));
}

#[test]
fn unknown_config_key_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "params": { "n": 3, "m": 0.2, "beta": -1.0, "gamma": 1 } }));
    let out = fde(&["constants", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("params"), "{err}");
    assert!(err.contains("gamma"), "{err}");
}

#[test]
fn validate_barenblatt_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fde(&["validate-barenblatt", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path())["verdict"], "PASS");
    assert!(dir.path().join("refinement.csv").exists());
}

#[test]
fn evolve_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = fde(&["evolve", "--N", "101", "--horizon", "0.02", "--out", d.path().to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let x = std::fs::read(a.path().join("snapshots.csv")).unwrap();
    let y = std::fs::read(b.path().join("snapshots.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

fn random_blend_config() -> Value {
    json!({
        "params": { "n": 3, "m": 0.2, "beta": -1.0 },
        "grid": { "R": 20.0, "N": 81 },
        "initial": { "kind": "random_blend", "lambda1": 2.0, "lambda2": 1.0 },
        "boundary": { "kind": "self_similar", "lambda": 2.0 },
        "stepping": { "dt": 1e-3, "horizon": 2e-3 },
    })
}

#[test]
fn seed_environment_variable_drives_random_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &random_blend_config());
    let csv = |seed: &str, name: &str| {
        let out_dir = dir.path().join(name);
        let out = fde(&["evolve", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[("FDE_SEED", seed)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(out_dir.join("snapshots.csv")).unwrap()
    };
    assert_eq!(csv("5", "a"), csv("5", "b"));
    assert_ne!(csv("5", "c"), csv("6", "d"));
    let bad = fde(&["evolve", "--config", &cfg], &[("FDE_SEED", "x")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn contract_without_shared_boundary_has_no_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "params": { "n": 3, "m": 0.2, "beta": -1.0 },
            "grid": { "R": 20.0, "N": 101 },
            "initial1": { "kind": "blend", "theta": 0.75, "lambda1": 2.0, "lambda2": 1.0 },
            "initial2": { "kind": "blend", "theta": 0.25, "lambda1": 2.0, "lambda2": 1.0 },
            "boundary": { "kind": "self_similar", "lambda": 2.0 },
            "boundary2": { "kind": "self_similar", "lambda": 1.0 },
            "stepping": { "dt": 1e-3, "horizon": 0.01 },
            "weights": [{ "kind": "power_mu", "mu": 0.25 }],
        }),
    );
    let out = fde(&["contract", "--config", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(dir.path());
    assert_eq!(v["weights"][0]["verdict"], Value::Null);
    assert!(dir.path().join("contraction.csv").exists());
}

#[test]
fn contract_rejects_even_grid_for_half_resolution() {
    let out = fde(&["contract", "--N", "200", "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
}

fn converge_config(threshold: f64) -> Value {
    json!({
        "params": { "n": 3, "m": 0.2, "beta": -1.0 },
        "grid": { "R": 5f64.exp(), "N": 401 },
        "initial": { "kind": "bump", "lambda0": 1.0, "amplitude": 0.1, "center": 1.0, "decades": 1.0 },
        "stepping": { "dt": 0.02, "horizon": 5.0, "snapshot_every": 10 },
        "settings": {
            "lambda0": 1.0, "lambda1": 2.0, "lambda2": 0.5,
            "weight": { "kind": "profile_gamma2", "lambda3": 1.0 },
            "threshold": threshold,
        },
    })
}

#[test]
fn converge_exit_code_follows_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for (threshold, code, verdict) in [(1e-2, 0, "PASS"), (1e-3, 2, "FAIL")] {
        let cfg = write_config(dir.path(), &converge_config(threshold));
        let out = fde(&["converge", "--config", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(code), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report(dir.path())["verdict"], verdict);
    }
}
