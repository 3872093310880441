use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use diophant::io;
use serde_json::Value;

fn diophant(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diophant"))
        .args(args)
        .env("DIOPHANT_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn assert_schema(v: &Value, name: &str) {
    let errs = io::validate(v, &io::schema(name).unwrap());
    assert!(errs.is_empty(), "{name}: {errs:?}");
}

#[test]
fn enumerate_is_idempotent_and_uses_env_cache() {
    let dir = tempfile::tempdir().unwrap();
    let a = diophant(&["enumerate", "--theta", "cbrt:2", "--tmax", "1000"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_schema(&json_of(&a), "enumerate");
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let path = files[0].as_ref().unwrap().path();
    let before = fs::read(&path).unwrap();
    let b = diophant(&["enumerate", "--theta", "cbrt:2", "--tmax", "1000"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(&path).unwrap(), before);
    let lines = String::from_utf8(before).unwrap();
    let header: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(header["format_version"], 1);
    assert_eq!(header["theta"], "cbrt:2");
}

#[test]
fn reports_match_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--theta", "cbrt:2", "--tmax", "20000"];
    for (cmd, schema) in [("analyze", "analysis"), ("exponents", "verdict"), ("verify", "verify")] {
        let mut args = vec![cmd];
        args.extend(common);
        let out = diophant(&args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert_schema(&json_of(&out), schema);
    }
    let out = diophant(&["omega-star", "--theta", "cbrt:2", "--tmax", "20000", "--hmax", "100"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_schema(&json_of(&out), "omega_star");
    let out = diophant(&["ledger", "--alpha", "3", "--r", "6", "--beta0", "8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_schema(&v, "ledger");
    assert_eq!(v["fixed_point"], "4");
    let out = diophant(&["gallery"], dir.path());
    assert_schema(&json_of(&out), "gallery");
}

#[test]
fn csv_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("report.json");
    let out = diophant(
        &["exponents", "--theta", "rand:1", "--tmax", "20000", "--format", "both", "--out", stem.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("nu,X,L,P,gamma,s\n"));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"]["omega_hat"]["samples_csv_ref"], "report.csv");
    assert!(dir.path().join("report.log").exists());

    let q = dir.path().join("quad");
    let out = diophant(
        &["omega-star", "--theta", "cbrt:2", "--tmax", "1000", "--hmax", "30", "--format", "csv", "--out", q.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("quad.csv")).unwrap();
    assert!(csv.starts_with("H,a0,a1,a2,xi,dist,gamma\n"));
    assert!(!dir.path().join("quad.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| diophant(args, dir.path()).status.code();
    assert_eq!(code(&["enumerate", "--theta", "cbrt:2", "--unknown"]), Some(2));
    assert_eq!(code(&["enumerate", "--theta", "nonsense"]), Some(2));
    assert_eq!(code(&["enumerate", "--theta", "cbrt:2", "--precision", "32"]), Some(2));
    assert_eq!(code(&["enumerate", "--theta", "cbrt:2", "--tmax", "0"]), Some(2));
    assert_eq!(code(&["ledger", "--alpha", "2", "--r", "1", "--beta0", "1"]), Some(2));
    let out = diophant(&["verify", "--theta", "poly:[-2,0,1]@1", "--tmax", "100", "--hmax", "20"], dir.path());
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis violated"));

    // same key at a different precision is refused
    assert_eq!(code(&["enumerate", "--theta", "rand:5", "--tmax", "50"]), Some(0));
    let out = diophant(&["enumerate", "--theta", "rand:5", "--tmax", "50", "--precision", "512"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache mismatch"));
}

#[test]
fn degenerate_and_general_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = diophant(&["enumerate", "--theta", "dec:0.5", "--tmax", "100"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let out = diophant(
        &["enumerate", "--theta", "cbrt:2", "--theta2", "cbrt:4", "--P", "0;1;t1", "--tmax", "2000"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["theta"], "general:cbrt:2|cbrt:4|P=0;1;t1");
    assert_eq!(
        diophant(&["enumerate", "--theta", "cbrt:2", "--theta2", "cbrt:4", "--tmax", "10"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn verify_gallery_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = diophant(&["verify", "--theta", "cbrt:2", "--tmax", "100000", "--slack", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["ok"], true);
    let out = diophant(&["verify", "--theta", "gallery:fib_cf_40", "--tmax", "1000000", "--slack", "0.8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
