use std::path::Path;
use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robin-lab"))
}

fn config(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn lists_every_experiment() {
    let out = lab().arg("list-experiments").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["model1d-lemmas", "weyl", "decay-suite", "annulus", "bracketing"] {
        assert!(text.contains(id), "{id}");
    }
}

#[test]
fn run_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .env("ROBIN_LAB_WORKERS", "2")
        .args(["run", config("weyl.toml").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS zero_threshold_deviation"));
    for f in ["summary.json", "counts.csv", "timing.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let chk = lab().arg("check").arg(dir.path().join("summary.json")).output().unwrap();
    assert_eq!(chk.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&chk.stdout).contains("consistent"));
}

#[test]
fn failing_criteria_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["run", config("model1d-lemmas.toml").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL dirichlet_brackets_shared"));
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"weyl\"\nh = []\n[tolerances]\nruntime_s = 1.0\n").unwrap();
    let out = lab().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h list must not be empty"));
    let out = lab().env("ROBIN_LAB_WORKERS", "zero").arg("list-experiments").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prints_reference_config() {
    let out = lab().args(["config", "gap"]).output().unwrap();
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(printed, std::fs::read_to_string(config("gap.toml")).unwrap());
}
