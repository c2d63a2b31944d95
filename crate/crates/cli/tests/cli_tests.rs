//! End-to-end tests of the `ssh2d` binary: exit codes, config handling,
//! output artifacts, and thread-count determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ssh2d")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn bands_happy_path_writes_table_echo_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &[
            "bands",
            "--config",
            repo_config("band_lines.json").to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--set",
            "line.samples=32",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(out_dir.join("bands.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# command: bands"));
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    assert!(lines.next().unwrap().starts_with("# version: "));
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 9, "1 momentum + 8 energy columns");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 32);
    for row in &rows {
        assert_eq!(row.split(',').count(), 9);
        for field in row.split(',') {
            let x: f64 = field.parse().expect("numeric field");
            assert!(x.is_finite());
        }
    }

    // The echo is itself a valid config reflecting the override.
    let echo = std::fs::read_to_string(out_dir.join("config_echo.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&echo).unwrap();
    assert_eq!(parsed["line"]["samples"], 32);
    assert_eq!(parsed["command"], "bands");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("bands_summary.json")).unwrap())
            .unwrap();
    assert!(summary["fermi_gap_on_line"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_echo_round_trip_reproduces_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let out = run(
        &[
            "bands",
            "--config",
            repo_config("band_lines.json").to_str().unwrap(),
            "--out",
            first.to_str().unwrap(),
            "--set",
            "line.samples=16",
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let echo = first.join("config_echo.json");
    let out = run(
        &["bands", "--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 0);
    let a = std::fs::read_to_string(first.join("bands.csv")).unwrap();
    let b = std::fs::read_to_string(second.join("bands.csv")).unwrap();
    assert_eq!(a, b, "re-running from the echoed config must reproduce the table");
}

#[test]
fn unknown_config_keys_and_command_mismatch_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"command":"bands","model":{"u":1,"t1":1,"v":0.75,"t2":0.75},"line":{"samples":8},"surprise":1}"#,
    )
    .unwrap();
    let out = run(
        &["bands", "--config", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));

    // Valid config, wrong subcommand.
    let out = run(
        &[
            "zak",
            "--config",
            repo_config("band_lines.json").to_str().unwrap(),
            "--out",
            dir.path().join("o2").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 1);

    // Missing required block.
    let nol = dir.path().join("noline.json");
    std::fs::write(&nol, r#"{"command":"bands","model":{"u":1,"t1":1,"v":0.75,"t2":0.75}}"#)
        .unwrap();
    let out = run(
        &["bands", "--config", nol.to_str().unwrap(), "--out", dir.path().join("o3").to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn numerical_failures_exit_2_with_a_diagnostic_file() {
    // Berry curvature demands a Hermitian model; a gained model fails in the
    // compute phase, after config validation.
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &[
            "berry",
            "--config",
            repo_config("curvature_transport.json").to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--set",
            "model.gamma=0.5",
            "--set",
            "grid.n=8",
        ],
        &[],
    );
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let diag = std::fs::read_to_string(out_dir.join("diagnostic.txt")).unwrap();
    assert!(diag.contains("error"), "diagnostic: {diag}");
}

#[test]
fn validate_exits_3_on_mismatches_and_0_on_a_clean_subset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("validate.json");
    std::fs::write(
        &cfg,
        r#"{"command":"validate","model":{"u":1.0,"t1":1.0,"v":0.75,"t2":0.75,"gamma":0.77}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &["validate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 3, "known transcription slips must be reported");
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("validate_summary.json")).unwrap(),
    )
    .unwrap();
    assert!(!summary["mismatches"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(out_dir.join("validate.csv")).unwrap();
    assert!(csv.contains("mismatch"));

    // Checks whose slip terms vanish at t1 = 0, gamma = 0 come back clean.
    let clean = dir.path().join("clean.json");
    std::fs::write(
        &clean,
        r#"{"command":"validate","model":{"u":1.0,"t1":0.0,"v":0.75,"t2":0.6,"gamma":0.0},
            "checks":["discriminant-literal","discriminant-corrected","spectrum-literal"]}"#,
    )
    .unwrap();
    let out = run(
        &[
            "validate",
            "--config",
            clean.to_str().unwrap(),
            "--out",
            dir.path().join("out2").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // Unknown check names are a config error.
    let out = run(
        &[
            "validate",
            "--config",
            clean.to_str().unwrap(),
            "--out",
            dir.path().join("out3").to_str().unwrap(),
            "--set",
            r#"checks=["bogus"]"#,
        ],
        &[],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn csv_bodies_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for (label, threads) in [("t1", "1"), ("t4", "4")] {
        let out_dir = dir.path().join(label);
        let out = run(
            &[
                "zak",
                "--config",
                repo_config("zak_sweep.json").to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--set",
                "sweep.samples=5",
                "--set",
                "sweep.segments=64",
            ],
            &[("SSH2D_THREADS", threads)],
        );
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        bodies.push(std::fs::read_to_string(out_dir.join("zak.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "thread count changed the CSV output");
}
