mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::spec_path;

fn keypoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keypoly")).args(args).output().unwrap()
}

fn run_golden(name: &str, out: &Path, extra: &[&str]) -> Output {
    let spec = spec_path(name);
    let mut args = vec!["run", spec.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    keypoly(&args)
}

#[test]
fn ex46_terminates_and_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_golden("ex46", dir.path(), &["--emit", "json,text,svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["json", "txt", "svg"] {
        assert!(dir.path().join(format!("ex46.{ext}")).is_file(), "{ext}");
    }
    let text = fs::read_to_string(dir.path().join("ex46.txt")).unwrap();
    assert!(text.contains("φ₂"));
    let svg = fs::read_to_string(dir.path().join("ex46.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_golden("sec9_p2", dir.path(), &[]).status.code(), Some(3));
    assert_eq!(run_golden("ex72", dir.path(), &[]).status.code(), Some(4));
    assert_eq!(run_golden("ex52", dir.path(), &[]).status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ex72.json")).unwrap()).unwrap();
    assert!(doc["branches"].as_array().unwrap().len() >= 2);
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_golden("sec9_p2", dir.path(), &["--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sec9_p2.json")).unwrap()).unwrap();
    assert_eq!(doc["steps"].as_array().unwrap().len(), 2);
    let o = run_golden("ex72", dir.path(), &["--branch", "select"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[bad-spec]"));
}

#[test]
fn missing_file_is_a_bad_spec() {
    let o = keypoly(&["run", "/nonexistent/spec.toml"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error["));
}

#[test]
fn first_policy_refuses_a_choice() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_golden("ex72", dir.path(), &["--branch", "first"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[non-unique]"));
}

#[test]
fn json_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run_golden("ex46", d.path(), &["--emit", "json"]).status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("ex46.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn integrality_violation_is_a_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    fs::write(
        &spec,
        r#"name = "bad"

[field]
char = "Q"

[variables]
names = ["x"]

[valuation]
kind = "monomial"
weights = ["1"]

[polynomial]
f = "z^2 - x^-1"

[options]
declared_integral = true
"#,
    )
    .unwrap();
    let o = keypoly(&["run", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[bad-spec]"));
}
