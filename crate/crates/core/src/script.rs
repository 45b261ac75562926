//! Judgment scripts: a sequence of bindings and checks, each annotated with
//! the combined-system judgment it should receive in figure notation.
//!
//! ```text
//! let y = true                 //: Bool ⟨⊥⟩ in context [y: Bool ⟨⊥⟩]
//! def id = fun (x: Bool) => x  //: (Bool ⟨⊥⟩ =>^⊥ Bool ⟨⊥⟩) ⟨⊥⟩
//! check id y                   //: Bool ⟨⊥⟩ ⊥
//! ```
//!
//! `let x = t` binds `x` at the type and qualifier of `t`; its judgment is
//! what a later mention of `x` synthesizes, followed by the binding itself.
//! `def x = t` binds a value and is judged by its binding. `check t` is
//! judged by the full judgment. A check ending in `@modulo-param` applies a
//! defined function after re-declaring its parameter qualifier as the
//! argument's own.

use serde::Serialize;
use thiserror::Error;

use crate::ae::{symbolic_binding, symbolic_judgment, typecheck_ae, AECtx, AEType, Qual};
use crate::syntax::{parse, Annot, Mark, QualAnnot, SyntaxError, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Syntax { line: usize, source: SyntaxError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LineKind {
    Let,
    Def,
    Check,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptLine {
    pub line: usize,
    pub kind: LineKind,
    pub name: Option<String>,
    pub term: Term,
    pub expected: String,
    pub modulo_param: bool,
}

const MODULO_PARAM: &str = "@modulo-param";

pub fn parse_script(text: &str) -> Result<Vec<ScriptLine>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || (trimmed.starts_with("//") && !trimmed.starts_with("//:")) {
            continue;
        }
        let malformed = |message: &str| ScriptError::Malformed {
            line,
            message: message.to_string(),
        };
        let (code, expected) = trimmed
            .split_once("//:")
            .ok_or_else(|| malformed("missing `//:` judgment"))?;
        let mut expected = expected.trim();
        let modulo_param = expected.ends_with(MODULO_PARAM);
        if modulo_param {
            expected = expected[..expected.len() - MODULO_PARAM.len()].trim_end();
        }
        let (kw, rest) = code.trim().split_once(char::is_whitespace).unwrap_or((code.trim(), ""));
        let kind = match kw {
            "let" => LineKind::Let,
            "def" => LineKind::Def,
            "check" => LineKind::Check,
            _ => return Err(malformed("expected `let`, `def` or `check`")),
        };
        let (name, src) = match kind {
            LineKind::Check => (None, rest),
            _ => {
                let (name, src) = rest.split_once('=').ok_or_else(|| malformed("expected `name = term`"))?;
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(malformed("expected a single name before `=`"));
                }
                (Some(name.to_string()), src)
            }
        };
        if modulo_param && kind != LineKind::Check {
            return Err(malformed("`@modulo-param` applies to checks only"));
        }
        let term = parse(src).map_err(|source| ScriptError::Syntax { line, source })?;
        out.push(ScriptLine {
            line,
            kind,
            name,
            term,
            expected: expected.to_string(),
            modulo_param,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LineResult {
    pub line: usize,
    pub kind: LineKind,
    pub source: String,
    pub expected: String,
    /// Absent when the line does not type check.
    pub derived: Option<String>,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Replace the parameter qualifier of an abstraction.
fn redeclare_param(t: &Term, q: Qual) -> Option<Term> {
    let Term::Abs { param, annot, body } = t else {
        return None;
    };
    let mut annot: Annot = annot.clone()?;
    annot.qual = Some(QualAnnot::Pair {
        fresh: q.fresh,
        stored: q.stored,
    });
    Some(Term::Abs {
        param: param.clone(),
        annot: Some(annot),
        body: body.clone(),
    })
}

pub fn run_script(lines: &[ScriptLine]) -> Vec<LineResult> {
    let mut ctx = AECtx::new();
    // Definitions with the context they were checked in.
    let mut defs: Vec<(String, Term, AECtx)> = Vec::new();
    let mut out = Vec::new();
    for l in lines {
        let mut note = None;
        let derived = match l.kind {
            LineKind::Let | LineKind::Def => match typecheck_ae(&ctx, &l.term) {
                Err(e) => {
                    note = Some(e.to_string());
                    None
                }
                Ok((ty, q, e)) => {
                    let name = l.name.clone().expect("bindings are named");
                    let shown = if l.kind == LineKind::Let {
                        let mention = Qual::new(Mark::Bot, q.fresh.join(q.stored));
                        format!(
                            "{} in context [{name}: {}]",
                            symbolic_binding(&ty, mention),
                            symbolic_binding(&ty, q)
                        )
                    } else {
                        if e.is_top() {
                            note = Some("definition has an effect".into());
                        }
                        symbolic_binding(&ty, q)
                    };
                    defs.push((name.clone(), l.term.clone(), ctx.clone()));
                    ctx.push(name, (ty, q));
                    Some(shown)
                }
            },
            LineKind::Check => {
                let mut check_ctx = ctx.clone();
                if l.modulo_param {
                    match relax(&ctx, &defs, &l.term) {
                        Ok((name, binding, msg)) => {
                            check_ctx.push(name, binding);
                            note = Some(msg);
                        }
                        Err(msg) => note = Some(msg),
                    }
                }
                match typecheck_ae(&check_ctx, &l.term) {
                    Ok((ty, q, e)) => Some(symbolic_judgment(&ty, q, e)),
                    Err(e) => {
                        note = Some(e.to_string());
                        None
                    }
                }
            }
        };
        let matches = derived.as_deref().map(squash) == Some(squash(&l.expected));
        out.push(LineResult {
            line: l.line,
            kind: l.kind,
            source: l.term.to_string(),
            expected: l.expected.clone(),
            derived,
            matches,
            note,
        });
    }
    out
}

/// For `f arg` with `f` defined in the script, the binding `f` receives when
/// its parameter is declared at the argument's qualifier.
fn relax(
    ctx: &AECtx,
    defs: &[(String, Term, AECtx)],
    t: &Term,
) -> Result<(String, (AEType, Qual), String), String> {
    let Term::App(f, arg) = t else {
        return Err("`@modulo-param` needs an application".into());
    };
    let Term::Var(name) = f.as_ref() else {
        return Err("`@modulo-param` needs a named function".into());
    };
    let (_, def, def_ctx) = defs
        .iter()
        .rev()
        .find(|(n, _, _)| n == name)
        .ok_or_else(|| format!("`{name}` is not defined in the script"))?;
    let (_, q_arg, _) = typecheck_ae(ctx, arg).map_err(|e| e.to_string())?;
    let relaxed = redeclare_param(def, q_arg).ok_or_else(|| format!("`{name}` is not an annotated abstraction"))?;
    let (ty, q, _) = typecheck_ae(def_ctx, &relaxed).map_err(|e| e.to_string())?;
    Ok((
        name.clone(),
        (ty, q),
        format!("parameter of `{name}` re-declared at {}", q_arg.symbolic()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let s = parse_script(
            "// comment\nlet y = true //: Bool ⟨⊥⟩ in context [y: Bool ⟨⊥⟩]\n\ncheck f y //: Bool ⟨⊥⟩ ⊥ @modulo-param\n",
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].kind, LineKind::Let);
        assert_eq!(s[0].name.as_deref(), Some("y"));
        assert!(s[1].modulo_param);
        assert_eq!(s[1].expected, "Bool ⟨⊥⟩ ⊥");
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_script("check true"), Err(ScriptError::Malformed { line: 1, .. })));
        assert!(parse_script("bind x = true //: Bool").is_err());
        assert!(parse_script("def = true //: Bool").is_err());
        assert!(parse_script("def x = true //: Bool @modulo-param").is_err());
        assert!(matches!(parse_script("\ncheck ( //: Bool"), Err(ScriptError::Syntax { line: 2, .. })));
    }

    #[test]
    fn runs_and_compares() {
        let s = parse_script(
            "let a = ref false //: Ref ⟨⊥,⊤⟩ in context [a: Ref ⟨⊤,⊥⟩]\n\
             def idr = fun (x: Ref) => x //: (Ref ⟨⊤,⊥⟩ =>^⊥ Ref ⟨⊥,⊤⟩) ⟨⊥⟩\n\
             check idr a //: Ref ⟨⊥,⊤⟩ ⊥\n\
             check idr a //: Ref ⟨⊥,⊤⟩   ⊥ @modulo-param\n",
        )
        .unwrap();
        let r = run_script(&s);
        assert!(r[0].matches && r[1].matches, "{r:?}");
        assert!(!r[2].matches);
        assert!(r[2].derived.is_none());
        assert!(r[3].matches, "{:?}", r[3]);
        assert_eq!(r[3].note.as_deref(), Some("parameter of `idr` re-declared at ⟨⊥,⊤⟩"));
    }
}
