use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isoskel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoskel"))
        .args(args)
        .env("ISOSKEL_THREADS", "2")
        .output()
        .unwrap()
}

fn write_surface(dir: &Path, name: &str, coeffs: &str, radius: f64) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("{{\"coeffs\": {coeffs}, \"radius\": {radius}}}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_error(out: &Output) -> (i32, String) {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), v["error"].as_str().unwrap().to_string())
}

#[test]
fn classify_reports_umbilic() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_surface(dir.path(), "u.json", "[[2,0,1],[0,2,1],[3,0,1],[1,2,-1],[0,3,2]]", 0.3);
    let v = stdout_json(&isoskel(&["classify", "--surface", &s]));
    assert_eq!(v["class"], "elliptic");
    assert_eq!(v["umbilic"], true);
}

#[test]
fn bad_surface_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = isoskel(&["classify", "--surface", path.to_str().unwrap()]);
    assert_eq!(stderr_error(&out), (2, "BadSurfaceFile".to_string()));
}

#[test]
fn unknown_flag_is_a_validation_error() {
    let out = isoskel(&["classify", "--surfce", "x.json"]);
    assert_eq!(stderr_error(&out), (2, "UnknownFlag".to_string()));
}

#[test]
fn theorem1_on_parabolic_point() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_surface(dir.path(), "p.json", "[[2,0,1],[0,3,1],[3,0,1]]", 0.2);
    let v = stdout_json(&isoskel(&["theorem1", "--surface", &s, "--k-ladder", "1e-2:1e-5:6"]));
    assert_eq!(v["vertex_pattern"], "3<->3");
    assert_eq!(v["inflexion_pattern"], "2<->2");
}

#[test]
fn symmetry_set_outputs_are_written_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_surface(dir.path(), "e.json", "[[2,0,1],[0,2,2],[3,0,1]]", 0.2);
    let run = |tag: &str| {
        let csv = dir.path().join(format!("ss{tag}.csv"));
        let svg = dir.path().join(format!("ss{tag}.svg"));
        let out = isoskel(&[
            "ss",
            "--surface",
            &s,
            "--k",
            "0.001",
            "--grid",
            "128",
            "--csv",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        (
            out.stdout,
            std::fs::read(csv).unwrap(),
            std::fs::read_to_string(svg).unwrap(),
        )
    };
    let (stdout, csv, svg) = run("a");
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let rows = isoskel::io::read_ss_rows(csv.as_slice()).unwrap();
    assert!(!rows.is_empty());
    let summary: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(summary["endpoints"], 4);
    assert_eq!(run("b"), (stdout, csv, svg));
}
