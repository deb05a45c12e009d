use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylcouple")).args(args).output().unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn example_passes_with_exit_zero() {
    let out = run(&["example", "singular-zero"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], "1.0");
    assert_eq!(v["status"], "PASS");
    assert_eq!(v["verdict"]["zero_regular"], "NO");
}

#[test]
fn analyze_is_deterministic() {
    let cfg = configs().join("quarter-power.json");
    let a = run(&["analyze", cfg.to_str().unwrap()]);
    let b = run(&["analyze", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failed_expectation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wrong.json");
    let text = std::fs::read_to_string(configs().join("singular-zero.json")).unwrap();
    std::fs::write(&path, text.replace("\"zero_regular\": \"NO\"", "\"zero_regular\": \"YES\"")).unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "FAIL");
}

#[test]
fn errors_exit_one() {
    assert_eq!(run(&["example", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "/nonexistent/config.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_resolvent_set_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    std::fs::write(
        &path,
        r#"{"schema_version": "1.0", "model": {
            "m_plus": {"expr": {"kind": "from_measure", "a": 0.0, "b": 1.0, "sigma": {}}},
            "m_minus": {"expr": {"kind": "from_measure", "a": 0.0, "b": 1.0, "sigma": {}}}}}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["flags"].as_array().unwrap().iter().any(|f| f == "EMPTY_RESOLVENT_SET"));
}

#[test]
fn grid_writes_lf_csv() {
    let out = run(&["grid", configs().join("free-grid.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 65);
    for r in &rows[1..] {
        assert_eq!(r.split(',').count(), 3);
        assert!(!r.contains(';'));
    }

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    let spec = dir.path().join("g.json");
    std::fs::write(
        &spec,
        format!(
            r#"{{"kind": "function", "window": [1, 10], "function": {{"catalog": "free-neumann"}}, "output": {:?}}}"#,
            target.to_str().unwrap()
        ),
    )
    .unwrap();
    assert_eq!(run(&["grid", spec.to_str().unwrap()]).status.code(), Some(0));
    assert!(std::fs::read_to_string(&target).unwrap().starts_with("y,"));
}
