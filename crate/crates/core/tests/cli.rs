use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn automaton(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../automata").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("autodens").chain(args.iter().copied());
    let code = autodens::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid json")
}

#[test]
fn paperfolding_along_primes() {
    let f = automaton("paperfolding.aut");
    let (code, out, _) = run(&["density", f.to_str().unwrap(), "--along", "primes"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["density"], serde_json::json!({"0": "1/2", "1": "1/2"}));
    assert_eq!(v["exists"], true);
    assert!(v["log_density"]["0"]["exact"].as_bool().unwrap());
}

#[test]
fn three_state_log_mode() {
    let f = automaton("threestate.aut");
    let (code, out, _) = run(&["density", f.to_str().unwrap(), "--along", "primes", "--log"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["natural"]["exists"], false);
    let b = &v["log_density"]["b"];
    assert_eq!(b["terms"], serde_json::json!([["1/1", "2/1"]]));
    assert_eq!(b["base"], 3);
}

#[test]
fn squares_in_base_six() {
    let f = automaton("constant6.aut");
    let (code, _, err) = run(&["density", f.to_str().unwrap(), "--along", "squares"]);
    assert_eq!(code, 1);
    assert!(err.contains("squares unsupported for base 6"), "{err}");
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(run(&["density", "/nonexistent.aut"]).0, 2);
    let f = automaton("paperfolding.aut");
    assert_eq!(run(&["density", f.to_str().unwrap(), "--along", "cubes"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aut");
    std::fs::write(&bad, "base 2\nstates a\ninitial a\noutput a=0\ndelta a 0 a\n").unwrap();
    let (code, _, err) = run(&["info", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.starts_with("parse: "), "{err}");
}

#[test]
fn extremal_report() {
    let f = automaton("threestate.aut");
    let (code, out, _) = run(&["extremal", f.to_str().unwrap(), "--along", "primes", "--alpha", "b"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["upper"], "3/4");
    assert_eq!(v["lower"], "1/2");
    assert_eq!(v["certificate"]["upper"]["preperiod"], serde_json::json!([1]));
    assert_eq!(v["certificate"]["upper"]["period"], serde_json::json!([2]));
}

#[test]
fn extremal_rejects_squares() {
    let f = automaton("threestate.aut");
    let (code, _, err) = run(&["extremal", f.to_str().unwrap(), "--along", "squares", "--alpha", "b"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("extremal: "), "{err}");
}

#[test]
fn decompose_writes_component_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("three.aut");
    std::fs::copy(automaton("threestate.aut"), &f).unwrap();
    let before = std::fs::read_to_string(&f).unwrap();
    let (code, out, _) = run(&["decompose", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["components"].as_array().unwrap().len(), 2);
    for s in ["b1", "m1", "b2", "m2"] {
        let p = dir.path().join(format!("three.aut.{s}"));
        let text = std::fs::read_to_string(&p).unwrap();
        autodens::parse_dfao(&text).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&f).unwrap(), before);
}

#[test]
fn info_reports_group() {
    let f = automaton("parity3.aut");
    let (code, out, _) = run(&["info", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    let c = &v["components"][0];
    assert_eq!(c["c"], 2);
    assert_eq!(c["group_order"], 2);
    assert_eq!(c["d"], 2);
    assert_eq!(c["synchronizing"], false);
    assert_eq!(c["generators"], serde_json::json!(["(1 2)"]));
}

#[test]
fn verify_text_and_exit_codes() {
    let f = automaton("thue_morse.aut");
    let (code, out, _) = run(&["verify", f.to_str().unwrap(), "--along", "squares", "--limit", "100000", "--format", "text"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.trim_end().ends_with("pass"));
    let t = automaton("threestate.aut");
    let (code, _, err) = run(&["verify", t.to_str().unwrap(), "--along", "primes", "--limit", "1000"]);
    assert_eq!(code, 1);
    assert!(err.contains("--log"));
    let (code, out, _) = run(&["verify", t.to_str().unwrap(), "--along", "primes", "--limit", "100000", "--log", "--tol", "0.1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["comparison"]["pass"], true);
}

#[test]
fn binary_exit_code() {
    let f = automaton("constant6.aut");
    let st = Command::new(env!("CARGO_BIN_EXE_autodens"))
        .args(["density", f.to_str().unwrap(), "--along", "squares"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    let ok = Command::new(env!("CARGO_BIN_EXE_autodens"))
        .args(["density", automaton("paperfolding.aut").to_str().unwrap(), "--along", "coprime=10", "--format", "text"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn state_budget_from_environment() {
    // read once per call; a tiny budget makes squares in base 4 fail to rebase
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pf4.aut");
    let pf4 = autodens::corpus::paperfolding().power_base(2).unwrap();
    std::fs::write(&f, pf4.serialize()).unwrap();
    let st = Command::new(env!("CARGO_BIN_EXE_autodens"))
        .env("AUTODENS_STATE_BUDGET", "1")
        .args(["density", f.to_str().unwrap(), "--along", "squares"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = Command::new(env!("CARGO_BIN_EXE_autodens"))
        .args(["density", f.to_str().unwrap(), "--along", "squares"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(v["density"]["1"], "1/1");
}
