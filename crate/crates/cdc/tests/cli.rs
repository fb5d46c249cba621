use std::path::Path;
use std::process::{Command, Output};

fn cdc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdc")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"backend": "markov", "generator": {"type": "cycle", "n": 4}, "sample": 3}"#);
    let out = cdc(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample"));
}

#[test]
fn missing_generator_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"backend": "markov"}"#);
    let out = cdc(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generator"));
}

#[test]
fn run_writes_report_metadata_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"backend": "markov", "generator": {"type": "path", "n": 5}, "suites": ["meyer", "oscillation"], "samples": 4, "curves": true}"#,
    );
    let out = cdc(&["run", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 2);
    assert!(report.get("createdUnixSeconds").is_none());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/metadata.json")).unwrap()).unwrap();
    assert!(meta["createdUnixSeconds"].as_u64().unwrap() > 0);
    let curves = std::fs::read_to_string(dir.path().join("o/curves.csv")).unwrap();
    assert!(curves.starts_with("t,bmo,big_bmo"));
}

#[test]
fn seed_override_changes_only_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"backend": "markov", "generator": {"type": "cycle", "n": 4}, "suites": ["axioms"], "samples": 3}"#);
    assert!(cdc(&["run", &cfg, "--seed", "11", "--out", "o"], dir.path()).status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 11);
}

#[test]
fn zoo_list_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let zoo = String::from_utf8(cdc(&["zoo", "list"], dir.path()).stdout).unwrap();
    assert!(zoo.contains("cycle") && zoo.contains("hypercube"));
    let schema: serde_json::Value = serde_json::from_slice(&cdc(&["schema"], dir.path()).stdout).unwrap();
    assert!(schema["properties"]["backend"].is_object());
}

#[test]
fn norms_and_carleson_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", r#"{"type": "cycle", "n": 6}"#);
    let out = cdc(&["norms", "--generator", &g, "--field", "delta:0"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(t["bmo"]["value"].as_f64().unwrap() > 0.0);
    let bad = cdc(&["norms", "--generator", &g, "--field", "delta:9"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_and_group_print_reports() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", r#"{"type": "complete", "n": 5}"#);
    let out = cdc(&["verify", "--generator", &g, "--suite", "curvature", "meyer", "--samples", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["suites"].as_array().unwrap().len(), 2);

    let grp = write(dir.path(), "q.json", r#"{"type": "quaternion", "psi": "indicator"}"#);
    let out = cdc(&["group", "--group", &grp, "--suite", "curvature", "routes", "--samples", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], true);
}
