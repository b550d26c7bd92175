//! End-to-end tests of the batch front end: exit codes, artifacts and
//! re-validation.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_smoothfact")
}

fn run_job(job: &Path, out: &Path) -> Output {
    Command::new(bin())
        .arg("--job")
        .arg(job)
        .arg("--out")
        .arg(out)
        .arg("--verbosity")
        .arg("0")
        .output()
        .expect("spawn smoothfact")
}

fn write_job(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const FACTORIZE_JOB: &str = r#"{
  "command": "factorize",
  "inputs": { "psi": "gaussian", "sigma": "one_plus_square" },
  "parameters": {
    "grid": { "half_width": 8.0, "spacing": 0.015625 },
    "epsilon": 1e-8,
    "bump_radius": 0.25
  }
}"#;

#[test]
fn factorize_job_writes_passing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", FACTORIZE_JOB);
    let out = dir.path().join("out");
    let output = run_job(&job, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    for name in [
        "result.json",
        "theta.bin",
        "phi.bin",
        "psi.bin",
        "sigma_tilde.bin",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let envelope: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(envelope["pass"], serde_json::Value::Bool(true));
    let residual = envelope["summary"]["residual"].as_f64().unwrap();
    assert!(residual <= 1e-6, "residual {residual}");

    // theta * phi reproduces psi on the loaded grids
    let theta = smoothfact_core::io::read_binary_file(out.join("theta.bin")).unwrap();
    let phi = smoothfact_core::io::read_binary_file(out.join("phi.bin")).unwrap();
    let psi = smoothfact_core::io::read_binary_file(out.join("psi.bin")).unwrap();
    let recon = theta
        .pointwise_mul(&phi)
        .unwrap()
        .pointwise_sub(&psi)
        .unwrap();
    assert!(recon.sup_norm() <= 1e-6);
}

#[test]
fn report_revalidates_factorize_output() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", FACTORIZE_JOB);
    let out = dir.path().join("out");
    assert_eq!(run_job(&job, &out).status.code(), Some(0));

    let report_job = write_job(
        dir.path(),
        "report.json",
        r#"{ "command": "report", "inputs": { "result": "out/result.json" } }"#,
    );
    let rout = dir.path().join("rout");
    let output = run_job(&report_job, &rout);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(rout.join("report.json").exists());

    // corrupting an artifact must break re-validation
    let theta_path = out.join("theta.bin");
    let mut bytes = std::fs::read(&theta_path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x01;
    std::fs::write(&theta_path, bytes).unwrap();
    let output = run_job(&report_job, &rout);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn constant_scale_fails_proper_check_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
          "command": "check-scale",
          "inputs": { "sigma": "constant:1" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.125 }, "checks": ["proper"] }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn quadratic_scale_passes_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
          "command": "check-scale",
          "inputs": { "sigma": "one_plus_square", "gamma": "one_plus_abs_pow:1", "omega": "one_plus_abs_pow:1" },
          "parameters": {
            "grid": { "half_width": 8.0, "spacing": 0.125 },
            "checks": ["proper", "domination", "equivalence", "translational", "subpolynomial", "scaled_space"],
            "shifts": [1.0, -1.0]
          }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}

#[test]
fn usage_errors_exit_1_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    // missing file
    let output = run_job(&dir.path().join("nope.json"), &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(1));

    // malformed json
    let job = write_job(dir.path(), "bad.json", "{ not json");
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(1));

    // unknown field
    let job = write_job(
        dir.path(),
        "unknown.json",
        r#"{ "command": "factorize", "parameterz": {} }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("parameterz"), "stderr: {stderr}");

    // invalid parameter named by path
    let job = write_job(
        dir.path(),
        "neg.json",
        r#"{
          "command": "factorize",
          "inputs": { "psi": "gaussian", "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.015625 }, "epsilon": -1.0 }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("parameters.epsilon"), "stderr: {stderr}");

    // missing required input named by path
    let job = write_job(
        dir.path(),
        "noinput.json",
        r#"{
          "command": "factorize",
          "inputs": { "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.015625 } }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("inputs.psi"), "stderr: {stderr}");
}

#[test]
fn non_member_input_exits_2() {
    // 1/(1+x^2) fails the decay proxy against the quadratic scale
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
          "command": "factorize",
          "inputs": { "psi": "rational", "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.03125 }, "epsilon": 1e-6 }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn counterexamples_job_passes() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
          "command": "counterexamples",
          "parameters": { "trials": 1000, "length": 50, "seed": 42 }
        }"#,
    );
    let out = dir.path().join("out");
    let output = run_job(&job, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let envelope: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert!(
        envelope["summary"]["inequalities"]["half_growth"]
            .as_f64()
            .unwrap()
            >= 2.0
    );
}

#[test]
fn csv_grid_input_round_trips_through_a_job() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smoothfact_core::Grid::line(8.0, 0.125).unwrap();
    let psi = smoothfact_core::grid::sample(|x| (-x[0] * x[0]).exp(), &grid).unwrap();
    smoothfact_core::io::write_csv_file(&psi, dir.path().join("psi.csv")).unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
          "command": "factorize",
          "inputs": { "psi": "psi.csv", "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.125 }, "epsilon": 1e-6 }
        }"#,
    );
    let output = run_job(&job, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}
