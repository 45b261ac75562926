//! Corpus files: one term per file, preceded by `// @` directives that name
//! it, declare its environment and record the verdicts it should receive.
//!
//! ```text
//! // @name Use:Read
//! // @env a:ref
//! // @figure impure
//! // @expect oracle=impure effect=impure ability=impure ae=impure
//! !a
//! ```
//!
//! Plain `//` comments are ignored. `@hole <type>` sets the oracle's hole
//! type for terms without a simple type.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ability::{typecheck_a, AbilType};
use crate::ae::{typecheck_ae, AEType, Qual};
use crate::effect::{typecheck_e, EffType};
use crate::oracle::{obs_purity, BindingKind, EnvBinding, EnvSpec, PurityOptions, PurityVerdict, SType};
use crate::syntax::{parse, parse_annot, SyntaxError, Term};
use crate::system::System;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Directive { line: usize, message: String },
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("no term after the directives")]
    Empty,
}

fn directive_error(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Directive {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: Option<String>,
    pub env: EnvSpec,
    pub hole: Option<SType>,
    /// The classification printed in the source table, keyed by column.
    pub figure: BTreeMap<String, String>,
    pub expect: BTreeMap<String, String>,
    pub term: Term,
}

/// Verdict keys an `@expect` line may use.
pub const EXPECT_KEYS: [&str; 8] = [
    "oracle",
    "effect",
    "ability",
    "ae",
    "effect.function",
    "ability.ability",
    "ae.function",
    "ae.ability",
];

fn pairs(line: usize, text: &str) -> Result<BTreeMap<String, String>, CorpusError> {
    let mut out = BTreeMap::new();
    for item in text.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| directive_error(line, format!("expected key=value, found `{item}`")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(directive_error(line, format!("`{k}` given twice")));
        }
    }
    Ok(out)
}

/// Parse `a:ref y:bool` style bindings.
pub fn parse_env(text: &str) -> Result<EnvSpec, String> {
    let mut env = EnvSpec::default();
    for item in text.split_whitespace() {
        let (name, kind) = item
            .split_once(':')
            .ok_or_else(|| format!("expected name:kind, found `{item}`"))?;
        let kind = match kind {
            "ref" => BindingKind::RefCell,
            "bool" => BindingKind::BoolVal,
            other => return Err(format!("unknown binding kind `{other}` (expected ref or bool)")),
        };
        env.bindings.push(EnvBinding {
            name: name.to_string(),
            kind,
        });
    }
    env.validate().map_err(|e| e.to_string())?;
    Ok(env)
}

pub fn parse_entry(text: &str) -> Result<CorpusEntry, CorpusError> {
    let mut entry = CorpusEntry {
        name: None,
        env: EnvSpec::default(),
        hole: None,
        figure: BTreeMap::new(),
        expect: BTreeMap::new(),
        term: Term::Cst(true),
    };
    let mut body = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        let Some(comment) = trimmed.strip_prefix("//") else {
            body.push_str(raw);
            body.push('\n');
            continue;
        };
        // Keep line numbers aligned for syntax errors in the term.
        body.push('\n');
        let Some(directive) = comment.trim().strip_prefix('@') else {
            continue;
        };
        let (key, rest) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
        let rest = rest.trim();
        match key {
            "name" => entry.name = Some(rest.to_string()),
            "env" => entry.env = parse_env(rest).map_err(|m| directive_error(line, m))?,
            "hole" => {
                let annot = parse_annot(rest).map_err(|e| directive_error(line, e.to_string()))?;
                entry.hole = Some(SType::erase(&annot));
            }
            "figure" => {
                entry.figure = if rest.contains('=') {
                    pairs(line, rest)?
                } else {
                    BTreeMap::from([("purity".to_string(), rest.to_string())])
                };
            }
            "expect" => {
                entry.expect = pairs(line, rest)?;
                if let Some(k) = entry.expect.keys().find(|k| !EXPECT_KEYS.contains(&k.as_str())) {
                    return Err(directive_error(line, format!("unknown verdict key `{k}`")));
                }
            }
            other => return Err(directive_error(line, format!("unknown directive `@{other}`"))),
        }
    }
    if body.trim().is_empty() {
        return Err(CorpusError::Empty);
    }
    entry.term = parse(&body)?;
    Ok(entry)
}

/// Purity as a corpus verdict word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pure,
    Impure,
    IllTyped,
    /// The key does not apply, such as function purity of a Boolean term.
    NotApplicable,
}

impl Verdict {
    pub fn of(pure: bool) -> Verdict {
        if pure {
            Verdict::Pure
        } else {
            Verdict::Impure
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Verdict::Pure => "pure",
            Verdict::Impure => "impure",
            Verdict::IllTyped => "ill-typed",
            Verdict::NotApplicable => "n/a",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

/// Whether values of a function type are pure functions: applying them has
/// no latent effect.
fn latent_verdict(latent: Option<bool>) -> Verdict {
    latent.map_or(Verdict::NotApplicable, |top| Verdict::of(!top))
}

/// Function classifications, as the two columns of the function table.
pub fn function_verdicts(system: System, env: &EnvSpec, t: &Term) -> (Verdict, Verdict) {
    match system {
        System::Effect => match typecheck_e(&env.effect_ctx(), t) {
            Err(_) => (Verdict::IllTyped, Verdict::IllTyped),
            Ok((ty, _)) => {
                let latent = match ty {
                    EffType::Fun(_, _, e) => Some(e.is_top()),
                    _ => None,
                };
                (latent_verdict(latent), Verdict::NotApplicable)
            }
        },
        System::Ability => match typecheck_a(&env.ability_ctx(), t) {
            Err(_) => (Verdict::IllTyped, Verdict::IllTyped),
            Ok((ty, a)) => {
                let ability = match ty {
                    AbilType::Fun { result_abil, .. } => Verdict::of(!a.is_top() && !result_abil.is_top()),
                    _ => Verdict::NotApplicable,
                };
                (Verdict::NotApplicable, ability)
            }
        },
        System::Ae => match typecheck_ae(&env.ae_ctx(), t) {
            Err(_) => (Verdict::IllTyped, Verdict::IllTyped),
            Ok((ty, q, _)) => match ty {
                AEType::Fun {
                    result_qual, latent, ..
                } => (
                    // Returning a fresh location is impure in this system.
                    latent_verdict(Some(latent.is_top() || result_qual.fresh.is_top())),
                    Verdict::of(q == Qual::BOT && result_qual == Qual::BOT),
                ),
                _ => (Verdict::NotApplicable, Verdict::NotApplicable),
            },
        },
    }
}

/// Everything the tools can say about one corpus term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryVerdicts {
    /// Keyed as in `@expect`.
    pub verdicts: BTreeMap<String, Verdict>,
    pub oracle: Option<PurityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<String>,
}

pub fn evaluate_entry(entry: &CorpusEntry, opts: &PurityOptions) -> EntryVerdicts {
    let mut verdicts = BTreeMap::new();
    for system in System::ALL {
        let v = match system.is_pure(&entry.env, &entry.term) {
            Ok(p) => Verdict::of(p),
            Err(_) => Verdict::IllTyped,
        };
        verdicts.insert(system.name().to_string(), v);
    }
    let (f, _) = function_verdicts(System::Effect, &entry.env, &entry.term);
    verdicts.insert("effect.function".into(), f);
    let (_, a) = function_verdicts(System::Ability, &entry.env, &entry.term);
    verdicts.insert("ability.ability".into(), a);
    let (f, a) = function_verdicts(System::Ae, &entry.env, &entry.term);
    verdicts.insert("ae.function".into(), f);
    verdicts.insert("ae.ability".into(), a);

    let opts = PurityOptions {
        hole_type: entry.hole.clone().or_else(|| opts.hole_type.clone()),
        ..opts.clone()
    };
    let (oracle, oracle_error) = match obs_purity(&entry.term, &entry.env, &opts) {
        Ok(v) => {
            verdicts.insert("oracle".into(), Verdict::of(v.is_pure()));
            (Some(v), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    EntryVerdicts {
        verdicts,
        oracle,
        oracle_error,
    }
}

/// `@expect` entries that the computed verdicts contradict, as
/// `(key, expected, actual)`.
pub fn mismatches(entry: &CorpusEntry, got: &EntryVerdicts) -> Vec<(String, String, String)> {
    entry
        .expect
        .iter()
        .filter_map(|(k, want)| {
            let actual = got.verdicts.get(k).map_or("missing", |v| v.word());
            (actual != want).then(|| (k.clone(), want.clone(), actual.to_string()))
        })
        .collect()
}

/// A golden corpus compiled into the library.
pub struct Golden {
    pub name: &'static str,
    pub files: &'static [(&'static str, &'static str)],
}

macro_rules! golden {
    ($dir:literal: $($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!("../corpus/", $dir, "/", $file)))),*]
    };
}

/// Terms of the intuition table for terms.
pub const FIG1: Golden = Golden {
    name: "fig1",
    files: golden!("fig1":
        "abs_any.lam",
        "diverge.lam",
        "alloc.lam",
        "use_read.lam",
        "use_write.lam",
        "mention.lam",
        "mask_read.lam",
        "mask_write.lam",
    ),
};

/// Terms of the intuition table for functions and abilities.
pub const FIG2: Golden = Golden {
    name: "fig2",
    files: golden!("fig2":
        "abs_id.lam",
        "abs_diverge.lam",
        "abs_alloc.lam",
        "abs_leak.lam",
        "abs_use.lam",
        "abs_usearg.lam",
        "abs_mention.lam",
        "abs_capture.lam",
        "abs_poly.lam",
    ),
};

/// Annotated definitions and applications, as a judgment script.
pub const FIG9_SCRIPT: &str = include_str!("../corpus/fig9/purity_with_types.judg");

impl Golden {
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, CorpusEntry)> + '_ {
        self.files.iter().map(|(file, text)| {
            let entry = parse_entry(text).unwrap_or_else(|e| panic!("golden file {file}: {e}"));
            (*file, entry)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directives() {
        let e = parse_entry(
            "// @name Use:Read\n// a remark\n// @env a:ref y:bool\n// @hole Bool\n// @figure impure\n// @expect oracle=impure ae=impure\n!a\n",
        )
        .unwrap();
        assert_eq!(e.name.as_deref(), Some("Use:Read"));
        assert_eq!(e.env.names().collect::<Vec<_>>(), ["a", "y"]);
        assert_eq!(e.hole, Some(SType::Bool));
        assert_eq!(e.figure["purity"], "impure");
        assert_eq!(e.expect["oracle"], "impure");
        assert_eq!(e.term, Term::get(Term::var("a")));
    }

    #[test]
    fn bad_directives() {
        assert!(matches!(parse_entry("// @bogus\ntrue"), Err(CorpusError::Directive { line: 1, .. })));
        assert!(parse_entry("// @expect oracle\ntrue").is_err());
        assert!(parse_entry("// @expect colour=red\ntrue").is_err());
        assert!(parse_entry("// @env a:int\ntrue").is_err());
        assert!(parse_entry("// @env a:ref a:bool\ntrue").is_err());
        assert_eq!(parse_entry("// @name x\n"), Err(CorpusError::Empty));
        let Err(CorpusError::Syntax(e)) = parse_entry("// @name x\n\n!(\n") else {
            panic!("expected a syntax error");
        };
        assert_eq!(e.pos.line, 4);
    }

    #[test]
    fn golden_files_parse() {
        assert_eq!(FIG1.entries().count(), 8);
        assert_eq!(FIG2.entries().count(), 9);
    }

    #[test]
    fn function_columns() {
        let env = parse_env("a:ref").unwrap();
        let t = parse("fun (x: Bool) => a").unwrap();
        assert_eq!(function_verdicts(System::Effect, &env, &t).0, Verdict::Pure);
        assert_eq!(function_verdicts(System::Ability, &env, &t).1, Verdict::Impure);
        assert_eq!(function_verdicts(System::Ae, &env, &t), (Verdict::Pure, Verdict::Impure));
        let b = parse("true").unwrap();
        assert_eq!(function_verdicts(System::Ae, &env, &b), (Verdict::NotApplicable, Verdict::NotApplicable));
    }
}
