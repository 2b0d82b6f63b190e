use std::path::Path;
use std::process::{Command, Output};

fn ringlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringlab"))
        .args(args)
        .env_remove("LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "outer = ball 0 0 2\ninner = ball 0 0 1\ngrid_n = 64\nangles = 256\nt_end = 0.1\ndt = 0.002\n";

#[test]
fn schema_lists_report_fields() {
    let out = ringlab(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("schema_version"));
    assert!(text.contains("per_level"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(ringlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ringlab(&["borell"]).status.code(), Some(1));
    assert_eq!(
        ringlab(&["borell", "--config", "/nonexistent/run.cfg"]).status.code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "outer = ball 0 0 2\ninner = ball 0 0 1\nrank_tol = -1\n");
    let out = ringlab(&["borell", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));

    let cfg = write_config(dir.path(), &format!("experiment = borell\n{SMALL}"));
    assert_eq!(ringlab(&["solve", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(
        ringlab(&["solve", "--config", &cfg, "--workers", "0"]).status.code(),
        Some(1)
    );
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let out = ringlab(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn violated_hypotheses_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("experiment = theorem12\npoisson_c = -1\n{SMALL}"));
    let out_dir = dir.path().join("out");
    let out = ringlab(&["theorem12", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL"));
    assert!(stdout.contains("Δu0"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn solve_runs_and_honours_seed_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("initial = poisson\n{SMALL}"));
    let out_dir = dir.path().join("out");
    let out = ringlab(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["params"]["workers"], 2);
    assert_eq!(report["params"]["run"]["analysis"]["seed"], 9);
}

#[test]
fn identity_sweep_prints_a_table() {
    let out = ringlab(&["verify-identities", "--seeds", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("hhat_derivative_expansion"));
    assert!(stdout.contains("verify-identities PASS"));
}
