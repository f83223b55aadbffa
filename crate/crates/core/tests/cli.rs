use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_g2moduli"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run(file: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(file).arg("--out").arg(out).args(extra).output().unwrap()
}

fn report(out: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn find<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    match v {
        Value::Object(m) => m.get(key).or_else(|| m.values().find_map(|x| find(x, key))),
        Value::Array(a) => a.iter().find_map(|x| find(x, key)),
        _ => None,
    }
}

#[test]
fn lists_every_bundled_example() {
    let out = bin().arg("list-examples").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "point-reference",
        "torus-signature",
        "path-scaling-ray",
        "path-affine",
        "kummer-typeI-unit",
        "kummer-typeII-unit",
        "kahler-null-boundary",
        "kahler-finite-boundary",
    ] {
        assert!(text.contains(name), "missing {name}");
        let shown = bin().args(["show-example", name]).output().unwrap();
        assert!(shown.status.success());
        assert_eq!(shown.stdout, std::fs::read(scenario(name)).unwrap());
    }
    assert_eq!(bin().args(["show-example", "nope"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn kummer_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("kummer-typeI-unit"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "kummer-typeI-unit");
    assert_eq!(r["bounds"]["energy_bound"].as_f64(), Some(6.0));
    assert_eq!(r["bounds"]["length_bound"].as_f64(), Some(6f64.sqrt()));
    assert_eq!(r["valid"], Value::Bool(true));
}

#[test]
fn hessian_signature() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("torus-signature"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let sig = find(&report(dir.path(), "torus-signature"), "signature").unwrap().clone();
    assert_eq!(sig, serde_json::json!([28, 7, 0]));
    assert!(dir.path().join("torus-signature-eigenvalues.csv").exists());
}

#[test]
fn malformed_input_exits_one_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let out_dir = dir.path().join("out");
    std::fs::create_dir(&out_dir).unwrap();
    for text in [
        "{ \"version\": 1, \"kind\": ",
        "{\"version\": 99, \"kind\": \"kahler\", \"payload\": {}}",
        "{\"version\": 1, \"kind\": \"kummer\", \"payload\": {\"T\": -1}}",
        "{\"version\": 1, \"kind\": \"point\", \"payload\": {}, \"bogus\": 1}",
    ] {
        std::fs::write(&bad, text).unwrap();
        let out = run(&bad, &out_dir, &[]);
        assert_eq!(out.status.code(), Some(1), "input {text}");
        assert!(!out.stderr.is_empty());
        assert_eq!(std::fs::read_dir(&out_dir).unwrap().count(), 0);
    }
    let missing = run(&dir.path().join("absent.json"), &out_dir, &[]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(bin().args(["run", "--no-such-flag"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn negative_verdict_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(scenario("kummer-typeI-unit")).unwrap()).unwrap();
    s["payload"]["components"][0]["delta_trivial"] = Value::Bool(false);
    let file = dir.path().join("negative.json");
    std::fs::write(&file, serde_json::to_string(&s).unwrap()).unwrap();
    let out = run(&file, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(dir.path(), "kummer-typeI-unit")["valid"], Value::Bool(false));
}

#[test]
fn runs_are_byte_identical() {
    for name in ["path-affine", "kahler-finite-boundary"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run(&scenario(name), a.path(), &[]).status.success());
        assert!(run(&scenario(name), b.path(), &[]).status.success());
        for ext in ["json", "csv"] {
            let file = format!("{name}.{ext}");
            assert_eq!(std::fs::read(a.path().join(&file)).unwrap(), std::fs::read(b.path().join(&file)).unwrap());
        }
    }
}

#[test]
fn flags_override_scenario_fields() {
    let base = tempfile::tempdir().unwrap();
    let coarse = tempfile::tempdir().unwrap();
    assert!(run(&scenario("path-scaling-ray"), base.path(), &[]).status.success());
    let out = run(&scenario("path-scaling-ray"), coarse.path(), &["--quad-nodes", "8", "--seed", "7"]);
    assert!(out.status.success());
    let e = |d: &Path| find(&report(d, "path-scaling-ray"), "energy_direct").unwrap().as_f64().unwrap();
    let (e0, e1) = (e(base.path()), e(coarse.path()));
    assert!((e0 - e1).abs() <= 1e-8 * e0.abs());
    let bad = run(&scenario("path-scaling-ray"), coarse.path(), &["--quad-nodes", "0"]);
    assert_eq!(bad.status.code(), Some(1));
}
