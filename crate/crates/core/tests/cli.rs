mod common;

use std::path::Path;
use std::process::{Command, Output};

fn landscape(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape"))
        .arg("--config")
        .arg(common::mini_config())
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_all_then_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = landscape(dir.path(), &["run-all"]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(
        stdout(&first)
            .lines()
            .filter(|l| l.ends_with(": done"))
            .count(),
        6
    );
    let second = landscape(dir.path(), &["run-all"]);
    assert_eq!(
        stdout(&second)
            .lines()
            .filter(|l| l.ends_with(": up to date"))
            .count(),
        6
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let early = landscape(dir.path(), &["train"]);
    assert_eq!(early.status.code(), Some(3), "train before ingest is stale");

    assert!(landscape(dir.path(), &["run-all"]).status.success());
    assert!(landscape(dir.path(), &["--seed", "7", "train"])
        .status
        .success());
    let stale = landscape(dir.path(), &["--seed", "7", "validate"]);
    assert_eq!(stale.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&stale.stderr).contains("atoms"));

    let missing = Command::new(env!("CARGO_BIN_EXE_landscape"))
        .args(["--config", "/nonexistent/landscape.toml", "ingest"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(landscape(a.path(), &["--threads", "1", "run-all"])
        .status
        .success());
    assert!(landscape(b.path(), &["--threads", "3", "run-all"])
        .status
        .success());
    let files = landscape_core::pipeline::list_files(a.path()).unwrap();
    for rel in files.iter().filter(|r| r.as_str() != "manifest.times.json") {
        assert_eq!(
            std::fs::read(a.path().join(rel)).unwrap(),
            std::fs::read(b.path().join(rel)).unwrap(),
            "{rel}"
        );
    }
}
