//! Replays the checked-in fuzz seeds through the assertions of the fuzz
//! targets, so the seeds stay valid inputs on a stable toolchain.

use std::fs;
use std::path::PathBuf;

use purelab::corpus::parse_entry;
use purelab::oracle::EnvSpec;
use purelab::script::{parse_script, run_script};
use purelab::syntax::{parse, parse_annot, parse_context, plug, Term};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds for {target}");
    files.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
}

#[test]
fn term_seeds_round_trip() {
    for s in seeds("parse") {
        let t = parse(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert_eq!(parse(&t.to_string()), Ok(t));
    }
}

#[test]
fn context_seeds_plug() {
    for s in seeds("parse_context") {
        let c = parse_context(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert!(c.hole_count() > 0);
        assert_eq!(plug(&c, &Term::Cst(true)).hole_count(), 0);
    }
}

#[test]
fn annotation_seeds_round_trip() {
    for s in seeds("parse_annot") {
        let a = parse_annot(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert_eq!(parse_annot(&a.to_string()), Ok(a));
    }
}

#[test]
fn environment_seeds_decode() {
    for s in seeds("env_json") {
        let env = EnvSpec::from_json(&s).unwrap();
        let _ = env.instantiate(env.config_count() - 1);
    }
}

#[test]
fn corpus_and_script_seeds_parse() {
    for s in seeds("corpus_entry") {
        parse_entry(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
    for s in seeds("script") {
        assert!(!run_script(&parse_script(&s).unwrap()).is_empty());
    }
}
