//! Acceptance criterion 10: the full batch suite is byte-deterministic
//! under fixed seeds.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_smoothfact")
}

fn run_job(job: &Path, out: &Path) -> i32 {
    Command::new(bin())
        .arg("--job")
        .arg(job)
        .arg("--out")
        .arg(out)
        .arg("--verbosity")
        .arg("0")
        .status()
        .expect("spawn smoothfact")
        .code()
        .unwrap_or(-1)
}

const JOBS: &[(&str, &str)] = &[
    (
        "factorize",
        r#"{
          "command": "factorize",
          "inputs": { "psi": "gaussian", "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.015625 }, "epsilon": 1e-8, "bump_radius": 0.25 }
        }"#,
    ),
    (
        "mollify",
        r#"{
          "command": "mollify",
          "inputs": { "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.015625 }, "bump_radius": 0.25 }
        }"#,
    ),
    (
        "check-scale",
        r#"{
          "command": "check-scale",
          "inputs": { "sigma": "one_plus_square", "gamma": "one_plus_abs_pow:1", "omega": "one_plus_abs_pow:1" },
          "parameters": {
            "grid": { "half_width": 8.0, "spacing": 0.125 },
            "checks": ["proper", "domination", "equivalence", "translational", "subpolynomial", "scaled_space"],
            "shifts": [1.0, -1.0]
          }
        }"#,
    ),
    (
        "convolve-demo",
        r#"{
          "command": "convolve-demo",
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.0625 }, "window_radius": 4, "trials": 25, "seed": 42 }
        }"#,
    ),
    (
        "crossed-factorize",
        r#"{
          "command": "crossed-factorize",
          "inputs": { "psi": "gaussian", "sigma": "one_plus_square" },
          "parameters": { "grid": { "half_width": 8.0, "spacing": 0.015625 }, "epsilon": 1e-8, "window_radius": 4 }
        }"#,
    ),
    (
        "counterexamples",
        r#"{
          "command": "counterexamples",
          "parameters": { "trials": 1000, "length": 50, "seed": 42 }
        }"#,
    ),
];

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut all_pass = true;
    let mut detail = String::new();
    for (name, body) in JOBS {
        let job = dir.path().join(format!("{name}.json"));
        std::fs::write(&job, body).unwrap();
        let out_a = dir.path().join(format!("{name}-a"));
        let out_b = dir.path().join(format!("{name}-b"));
        let code_a = run_job(&job, &out_a);
        let code_b = run_job(&job, &out_b);
        let codes_ok = code_a == 0 && code_b == 0;

        let mut bytes_ok = true;
        let mut entries: Vec<_> = std::fs::read_dir(&out_a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        entries.sort();
        assert!(!entries.is_empty(), "{name}: no artifacts written");
        for entry in &entries {
            let a = std::fs::read(out_a.join(entry)).unwrap();
            let b = std::fs::read(out_b.join(entry)).unwrap();
            if a != b {
                bytes_ok = false;
            }
        }
        // and the second run produced nothing extra
        let count_b = std::fs::read_dir(&out_b).unwrap().count();
        let files_ok = count_b == entries.len();

        let ok = codes_ok && bytes_ok && files_ok;
        all_pass &= ok;
        detail.push_str(&format!(
            "{name}: exit ({code_a},{code_b}), {} files byte-identical: {bytes_ok}; ",
            entries.len()
        ));
    }

    // re-validation reports are deterministic too
    let report_job = dir.path().join("report.json");
    std::fs::write(
        &report_job,
        r#"{ "command": "report", "inputs": { "result": "factorize-a/result.json" } }"#,
    )
    .unwrap();
    let rep_a = dir.path().join("report-a");
    let rep_b = dir.path().join("report-b");
    let code_a = run_job(&report_job, &rep_a);
    let code_b = run_job(&report_job, &rep_b);
    let rep_bytes_a = std::fs::read(rep_a.join("report.json")).unwrap();
    let rep_bytes_b = std::fs::read(rep_b.join("report.json")).unwrap();
    let report_ok = code_a == 0 && code_b == 0 && rep_bytes_a == rep_bytes_b;
    all_pass &= report_ok;
    detail.push_str(&format!(
        "report: exit ({code_a},{code_b}), byte-identical: {report_ok}"
    ));

    let status = if all_pass { "PASS" } else { "FAIL" };
    println!(
        "[acceptance] criterion 10: {status} - determinism ({})",
        detail.trim_end()
    );
    assert!(all_pass, "{detail}");
}
