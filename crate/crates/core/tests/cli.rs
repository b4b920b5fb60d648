use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const FIVE: &str = r#"{"points":["a","b","c","d","e"],"triples":[["b","c","d"],["b","d","e"],["b","c","e"],["c","d","e"]]}"#;

fn fixtures() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("m.json", FIVE),
        ("w.json", r#"{"n":2,"gens":[[2,3]],"torsion":["0"]}"#),
        ("s.json", r#"{"n":2,"gens":[[1,0]],"torsion":["0"]}"#),
        ("mu.json", r#"{"default":1}"#),
        ("bad_mu.json", r#"{"default":0}"#),
    ] {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn predim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predim")).current_dir(dir).args(args).output().unwrap()
}

fn json_of(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn predimension_queries() {
    let d = fixtures();
    let q = |cmd: &str, set: &str| json_of(&predim(d.path(), &["--json", cmd, "--spec", "trivial_r", "--structure", "m.json", "--set", set]));
    assert_eq!(q("delta", "b,c,d"), json!({"delta": 2}));
    assert_eq!(q("partial", "b"), json!({"partial": 0}));
    assert_eq!(q("closure", "b"), json!({"closure": ["b", "c", "d", "e"]}));
}

#[test]
fn text_output_without_json_flag() {
    let d = fixtures();
    let o = predim(d.path(), &["gs-check", "--spec", "trivial_r", "--structure", "m.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");
}

#[test]
fn torus_commands() {
    let d = fixtures();
    let t = json_of(&predim(d.path(), &["--json", "torus", "typical", "w.json", "s.json"]));
    assert_eq!(t, json!({"actual": 0, "atypical": false, "defect": 0, "expected": 0}));
    let i = json_of(&predim(d.path(), &["--json", "torus", "intersect", "w.json", "s.json"]));
    assert_eq!(i, json!({"components": 3, "dim": 0}));
}

#[test]
fn builds_are_reproducible_and_collapse_respects_mu() {
    let d = fixtures();
    let args = ["--json", "--seed", "3", "generic", "--steps", "12", "--cap", "8"];
    let a = json_of(&predim(d.path(), &args));
    assert_eq!(a, json_of(&predim(d.path(), &args)));
    assert!(a["skipped"].as_array().unwrap().is_empty());

    let c = json_of(&predim(d.path(), &["--json", "--seed", "3", "collapse", "--mu", "mu.json", "--steps", "12", "--cap", "8"]));
    let steps = |v: &Value, k: &str| v[k].as_array().unwrap().len();
    assert_eq!(steps(&c, "realized") + steps(&c, "skipped"), steps(&a, "realized"));
    assert_eq!(c["mu"]["default"], 1);
}

#[test]
fn exit_codes() {
    let d = fixtures();
    let code = |args: &[&str]| predim(d.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["delta", "--spec", "trivial_r", "--structure", "missing.json", "--set", "a"]), Some(2));
    assert_eq!(code(&["partial", "--spec", "trivial_r", "--structure", "m.json", "--set", "zz"]), Some(2));
    assert_eq!(code(&["collapse", "--mu", "bad_mu.json"]), Some(2));
    assert_eq!(code(&["--max-points", "2", "pregeometry", "--spec", "trivial_r", "--structure", "m.json"]), Some(1));
    assert_eq!(code(&["--timeout-ms", "1", "generic", "--steps", "400", "--cap", "60"]), Some(1));
}

#[test]
fn errors_go_to_stderr() {
    let d = fixtures();
    let o = predim(d.path(), &["partial", "--spec", "trivial_r", "--structure", "m.json", "--set", "zz"]);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown point 'zz'"));
}
