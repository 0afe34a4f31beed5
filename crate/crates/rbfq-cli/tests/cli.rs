use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rbfq"));
    cmd.env_remove("RBFQ_OUT_DIR");
    cmd
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output, expect_code: i32) -> serde_json::Value {
    assert_eq!(
        out.status.code(),
        Some(expect_code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stderr);
    let value: serde_json::Value = serde_json::from_str(text.trim()).expect("stderr is JSON");
    value["error"].clone()
}

#[test]
fn complexity_reports_both_exponents() {
    let out = bin()
        .args(["complexity", "--beta", "3", "--d", "10", "--k", "2"])
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert!((value["classical"].as_f64().unwrap() - 17.0).abs() < 1e-9);
    assert!((value["quantum"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    assert_eq!(value["advantage"], serde_json::Value::Bool(true));
    assert!((value["tau"].as_f64().unwrap() - 7.5).abs() < 1e-12);
}

#[test]
fn kernel_dump_expands_the_degree_five_polynomial() {
    let out = bin()
        .args(["kernel", "dump", "--d", "3", "--k", "1"])
        .output()
        .unwrap();
    let value = stdout_json(&out);
    let phi: Vec<f64> = value["phi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // (1 - r)^4 (4r + 1) expanded in ascending powers.
    assert_eq!(phi, vec![1.0, 0.0, -10.0, 20.0, -15.0, 4.0]);
    assert!(value["bilaplacian"].is_null());
}

#[test]
fn missing_config_fails_with_io_error_json() {
    let out = bin()
        .args(["study", "convergence", "--config", "/no/such/config.json"])
        .output()
        .unwrap();
    let err = stderr_error(&out, 4);
    assert_eq!(err["kind"], "io");
    assert!(err["message"].as_str().unwrap().contains("config.json"));
}

#[test]
fn malformed_config_fails_with_config_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema":2,"d":1,"k":2,"h_ladder":[0.3],"delta_rule":{"rule":"fixed","delta":0.9}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["study", "convergence", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    let err = stderr_error(&out, 3);
    assert_eq!(err["kind"], "config");
    assert!(err["message"].as_str().unwrap().contains("schema"));
}

#[test]
fn unknown_flag_fails_with_usage_error_json() {
    let out = bin()
        .args(["complexity", "--bogus", "1"])
        .output()
        .unwrap();
    let err = stderr_error(&out, 2);
    assert_eq!(err["kind"], "usage");
}

fn gen_points(dir: &Path, d: usize, n: usize) -> std::path::PathBuf {
    let path = dir.join("points.csv");
    let out = bin()
        .args(["points", "gen", "--d", &d.to_string(), "--n", &n.to_string(), "--out"])
        .arg(&path)
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert_eq!(value["n_interior"].as_u64().unwrap() as usize, n);
    path
}

#[test]
fn points_assemble_solve_pipeline_produces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let points = gen_points(dir.path(), 1, 6);

    let out = bin()
        .args(["assemble", "--points"])
        .arg(&points)
        .args(["--k", "2", "--delta", "0.9", "--normalize", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert_eq!(value["n"].as_u64().unwrap(), 8);
    assert!(value["eta"].as_f64().unwrap() > 0.0);
    for name in [
        "system.mtx",
        "system_raw.mtx",
        "rhs.csv",
        "evaluation.mtx",
        "evaluation_hat.mtx",
        "dilation.mtx",
        "system_hat.mtx",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }

    let out = bin()
        .args(["solve", "--points"])
        .arg(&points)
        .args(["--k", "2", "--delta", "0.9", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert!(value["l2_error"].as_f64().unwrap() < 0.5);
    for name in ["coefficients.csv", "u_bar.csv", "solve.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn env_var_overrides_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");
    let points = gen_points(dir.path(), 1, 4);
    let out = bin()
        .env("RBFQ_OUT_DIR", &env_dir)
        .args(["solve", "--points"])
        .arg(&points)
        .args(["--k", "2", "--delta", "0.9", "--out-dir"])
        .arg(&flag_dir)
        .output()
        .unwrap();
    stdout_json(&out);
    assert!(env_dir.join("solve.json").exists());
    assert!(!flag_dir.join("solve.json").exists());
}

#[test]
fn convergence_study_writes_report_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.json");
    std::fs::write(
        &config,
        r#"{"schema":1,"d":1,"k":2,"h_ladder":[0.4,0.3],
            "delta_rule":{"rule":"fixed","delta":0.9},"solver":"classical"}"#,
    )
    .unwrap();
    let out = bin()
        .args(["study", "convergence", "--config"])
        .arg(&config)
        .args(["--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert_eq!(value["rows"].as_u64().unwrap(), 2);
    assert_eq!(value["failed_rows"].as_u64().unwrap(), 0);
    assert!(dir.path().join("convergence_report.json").exists());
    let rows = std::fs::read_to_string(dir.path().join("convergence_rows.csv")).unwrap();
    assert!(rows.lines().next().unwrap().contains("l2_error"));
}

#[test]
fn qsolve_runs_the_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let points = gen_points(dir.path(), 1, 2);
    let out = bin()
        .args(["qsolve", "--points"])
        .arg(&points)
        .args(["--k", "2", "--delta", "0.3", "--eps-l", "1e-3", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    let value = stdout_json(&out);
    assert!(value["fidelity_vs_classical"].as_f64().unwrap() > 0.99);
    assert!(value["success_solve"].as_f64().unwrap() > 0.5);
    for name in ["coefficient_state.csv", "solution_state.csv", "ledger.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ledger.json")).unwrap())
            .unwrap();
    assert!(ledger["filter_degree"].as_u64().unwrap() > 0);
    assert!(ledger["kappa"].as_f64().unwrap() > 1.0);
}
