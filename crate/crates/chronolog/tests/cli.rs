//! Black-box checks of the installed binary: exit codes, output shapes,
//! and the calibrate -> predict -> evaluate chain on a real profile.
//! Timing subcommands all live in one test; the advisory lock admits one
//! timing process at a time.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chronolog"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_exports_cost_functions() {
    let out = bin()
        .arg("analyze")
        .arg(repo_root().join("programs/append.pl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("app/3"), "{text}");
    assert!(text.contains("step: n1 + 1"), "{text}");
    assert!(text.contains("vounif: 1"), "{text}");

    let out = bin()
        .args(["analyze", "--model", "step"])
        .arg(repo_root().join("programs/nrev.pl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("step: 1/2*n1^2 + 3/2*n1 + 1"), "{text}");
    assert!(!text.contains("giunif"), "single-component export: {text}");
}

#[test]
fn analyze_rejects_bad_input() {
    let out = bin()
        .args(["analyze", "no-such-file.pl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-file.pl"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pl");
    std::fs::write(&bad, ":- entry(p/1).\np(X) :- q(X).\n").unwrap();
    let out = bin().arg("analyze").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["calibrate", "--reps", "0", "--out"])
        .arg(dir.path().join("p.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["calibrate", "--sizes", "four", "--out"])
        .arg(dir.path().join("p.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["predict", "missing.pl", "--profile", "missing.toml", "--sizes", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_writes_exit_one() {
    let out = bin()
        .arg("analyze")
        .arg(repo_root().join("programs/append.pl"))
        .args(["--out", "/nonexistent-dir/export.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn calibrate_predict_evaluate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.toml");

    let out = bin()
        .args(["calibrate", "--sizes", "2,4,6", "--reps", "2", "--seed", "1", "--out"])
        .arg(&profile)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("seed: 1"), "{text}");
    assert!(text.contains("S: "), "{text}");
    let saved = std::fs::read_to_string(&profile).unwrap();
    assert!(saved.contains("[builtins]"), "{saved}");
    assert!(saved.contains("signature = \"step,nargs,giunif,gounif,viunif,vounif\""));
    assert!(saved.contains("signature = \"step\""), "baseline fit: {saved}");

    let out = bin()
        .arg("predict")
        .arg(repo_root().join("programs/nrev.pl"))
        .arg("--profile")
        .arg(&profile)
        .args(["--sizes", "5,10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("n=5 estimate_ns="), "{text}");
    assert!(text.contains("n=10 estimate_ns="), "{text}");

    let out = bin()
        .arg("predict")
        .arg(repo_root().join("programs/nrev.pl"))
        .arg("--profile")
        .arg(&profile)
        .args(["--model", "step,giunif", "--sizes", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("step,giunif"), "{err}");
    assert!(err.contains("step,nargs,giunif,gounif,viunif,vounif"), "{err}");

    let report = dir.path().join("report.txt");
    let out = bin()
        .arg("evaluate")
        .arg("--profile")
        .arg(&profile)
        .args(["--reps", "2", "--seed", "3", "--format", "records", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("benchmark=nrev"), "{text}");
    assert!(text.contains("global model=\"step\""), "{text}");
    for id in ["append", "nrev", "hanoi", "palind", "powset", "evpol"] {
        assert!(
            text.contains(&format!("estimate benchmark={id}")),
            "missing {id} in {text}"
        );
    }
}
