use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn purelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus"))
}

#[test]
fn typecheck_prints_each_system() {
    let o = purelab(&["typecheck", "--bind", "a:ref", "let x = ref true in !x"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("effect: Bool ; top"), "{out}");
    assert!(out.contains("ae: Bool ; <bot,bot> ; bot"), "{out}");
}

#[test]
fn ill_typed_term_exits_with_one() {
    let o = purelab(&["typecheck", "--system", "ae", "true false"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_and_usage_errors_exit_with_two() {
    assert_eq!(purelab(&["typecheck", "(fun"]).status.code(), Some(2));
    assert_eq!(purelab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(purelab(&["suite", "nope"]).status.code(), Some(2));
    assert_eq!(purelab(&["compare", "/definitely/not/here"]).status.code(), Some(2));
}

#[test]
fn eval_with_trace_and_environment() {
    let o = purelab(&["eval", "--trace", "--bind", "a:ref", "--config", "1", "!a"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().starts_with("e-get"), "{out}");
    assert!(out.ends_with("true [0: true]\n"), "{out}");
    let o = purelab(&["--json", "eval", "--fuel", "3", "(fun (x: Bool) => x x) (fun (x: Bool) => x x)"]);
    assert_eq!(json(&o)["outcome"], "timeout");
}

#[test]
fn env_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.json");
    fs::write(&env, r#"{"bindings": [{"name": "a", "kind": "refCell"}]}"#).unwrap();
    let o = purelab(&["--json", "purity", "--env", env.to_str().unwrap(), "a := true"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["systems"]["effect"], "impure");
    fs::write(&env, r#"{"bindings": [{"name": "a", "kind": "refCell"}, {"name": "a", "kind": "boolVal"}]}"#).unwrap();
    let o = purelab(&["purity", "--env", env.to_str().unwrap(), "true"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_purity_reports_a_witness() {
    let o = purelab(&["--json", "oracle", "purity", "--bind", "a:ref", "ref true"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"]["status"], "impure");
    assert!(v["verdict"]["witness"]["context"].is_string());
    let o = purelab(&["--json", "oracle", "purity", "--hole", "Bool", "(fun (x: Bool) => x x) (fun (x: Bool) => x x)"]);
    assert_eq!(json(&o)["verdict"]["status"], "impure");
}

#[test]
fn encode_check() {
    let o = purelab(&["encode", "--from", "effect", "--check", "--bind", "a:ref", "fun (x: Bool) => !a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("encoding holds"));
}

#[test]
fn compare_golden_corpus() {
    let o = purelab(&["--json", "compare", corpus_dir().join("fig1").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["schema"], "purelab-report/1");
    assert_eq!(v["perTerm"].as_array().unwrap().len(), 8);
    assert_eq!(v["summary"]["oraclePure"], 4);
    assert!(v.get("wallTime").is_none());
    let o = purelab(&["compare", corpus_dir().join("fig2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn compare_is_deterministic_and_timing_is_opt_in() {
    let dir = corpus_dir().join("fig1");
    let dir = dir.to_str().unwrap();
    let a = purelab(&["--json", "compare", dir]);
    let b = purelab(&["--json", "compare", dir]);
    assert_eq!(a.stdout, b.stdout);
    let t = purelab(&["--json", "--timing", "compare", dir]);
    assert!(json(&t)["wallTime"].is_f64());
}

#[test]
fn compare_empty_and_broken_directories() {
    let dir = tempfile::tempdir().unwrap();
    let o = purelab(&["--json", "compare", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["perTerm"], Value::Array(vec![]));

    fs::write(dir.path().join("bad.lam"), "// @env a:widget\ntrue").unwrap();
    fs::write(dir.path().join("good.lam"), "// @env a:ref\n!a").unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let o = purelab(&["--json", "compare", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["inputs"], serde_json::json!(["bad.lam", "good.lam"]));
    assert!(v["perTerm"][0]["error"].is_string());
    assert_eq!(v["perTerm"][1]["semantic"], "impure");
}

#[test]
fn failed_expectation_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("wrong.lam"), "// @env a:ref\n// @expect oracle=pure\nref true").unwrap();
    let o = purelab(&["compare", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[oracle: expected pure, got impure]"), "{}", stdout(&o));
}

#[test]
fn oracle_safety_over_a_corpus() {
    let o = purelab(&[
        "--json",
        "oracle",
        "safety",
        "--system",
        "all",
        "--corpus",
        corpus_dir().join("fig2").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["summary"]["ae.terms"], 9);
}

#[test]
fn suites_record_their_seed() {
    let o = purelab(&["--json", "suite", "beta", "--count", "5", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["violations"], 0);
    assert_eq!(purelab(&["suite", "algebra"]).status.code(), Some(0));
}

#[test]
fn judgment_script_reports_each_line() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.judg");
    fs::write(&script, "def id = fun (x: Bool) => x //: (Bool ⟨⊥⟩ =>^⊥ Bool ⟨⊥⟩) ⟨⊥⟩\n").unwrap();
    let o = purelab(&["script", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    fs::write(&script, "check true //: Ref ⟨⊥⟩ ⊥\n").unwrap();
    let o = purelab(&["script", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("0/1 lines match"));
}
