//! Black-box tests of the command-line binary: exit codes, artifact
//! layout, schema headers, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forchheimer"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const STATIONARY: &str = "\
[run]
mode = stationary
tol = 1e-10

[mesh]
nx = 4
ny = 4

[coefficients]
alpha = 1.0
beta = 1.0

[source]
value = 1.0

[boundary]
value = 0.5
";

const TRANSIENT: &str = "\
[run]
mode = transient
tol = 1e-10

[mesh]
nx = 3
ny = 3

[time]
horizon = 0.5
steps = 5

[initial]
value = 1.0
";

#[test]
fn stationary_run_is_deterministic_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.ini", STATIONARY);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");

    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in ["solution.vtk", "system.mtx", "report.txt"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    assert!(!out_a.join("FAILED").exists());

    let report = fs::read_to_string(out_a.join("report.txt")).unwrap();
    assert!(report.contains("converged = true"));

    let mtx = fs::read_to_string(out_a.join("system.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general"));
}

#[test]
fn transient_run_emits_schema_versioned_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.ini", TRANSIENT);
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let csv = fs::read_to_string(out.join("monitor.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("schema = 1"));
    assert_eq!(
        lines.next(),
        Some("step,time,energy,flux_norm,increment,jump_surrogate,mass_defect")
    );
    assert_eq!(lines.count(), 5); // one row per step
    assert!(out.join("final.vtk").exists());
}

#[test]
fn sweep_run_respects_seed_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        "[run]\nmode = sweep\n\n[sweep]\nsamples = 2000\n",
    );
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args([
                "run",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "99",
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = fs::read_to_string(out_a.join("sweep.csv")).unwrap();
    let b = fs::read_to_string(out_b.join("sweep.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("schema = 1\ninequality,min_relative_slack\n"));
}

#[test]
fn study_run_writes_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        "[run]\nmode = study\ntol = 1e-9\n\n[study]\nmeshes = 2,4,8\ncase = darcy\n",
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("study.csv")).unwrap();
    assert!(csv.starts_with("schema = 1\n"));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("order_s"));
}

#[test]
fn usage_errors_exit_one() {
    // missing config file
    let status = bin().args(["run", "/nonexistent/config.ini"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // unknown flag
    let status = bin().args(["run", "x.ini", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // no subcommand
    let status = bin().status().unwrap();
    assert_eq!(status.code(), Some(1));

    // help is a success
    let status = bin().arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn invalid_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.ini",
        &STATIONARY.replace("beta = 1.0", "beta = 0.0"),
    );
    let output = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("beta lower bound must be positive"), "{stderr}");
}

#[test]
fn nonconvergence_exits_two_and_leaves_marker() {
    let tmp = tempfile::tempdir().unwrap();
    // a tolerance below machine precision cannot be met; the solver must
    // report nonconvergence rather than loop forever
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &STATIONARY.replace("tol = 1e-10", "tol = 1e-30"),
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let marker = fs::read_to_string(out.join("FAILED")).unwrap();
    assert!(!marker.trim().is_empty());
}
