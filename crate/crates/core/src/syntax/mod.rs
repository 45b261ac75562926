//! Object-language syntax shared by the evaluator, the three checkers and the
//! oracle.
//!
//! Terms are the Boolean STLC with first-order references. `let` is surface
//! sugar only: the parser rewrites it to an immediately applied, unannotated
//! abstraction (see [`desugar_let`]).

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexer::{Pos, SyntaxError};
pub use parser::{parse, parse_annot, parse_context};

/// Identifier used by the oracle for the let-bound copy of the term under
/// test. It is not a valid surface identifier, so no parsed or enumerated
/// term can capture it.
pub const RESERVED_VAR: &str = "%x";

/// A binary qualifier mark, shared by effect and ability annotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Bot,
    Top,
}

impl Mark {
    pub fn is_top(self) -> bool {
        self == Mark::Top
    }

    pub fn join(self, other: Mark) -> Mark {
        self.max(other)
    }

    pub fn meet(self, other: Mark) -> Mark {
        self.min(other)
    }

    pub fn leq(self, other: Mark) -> bool {
        self <= other
    }

    /// `⊥` or `⊤`.
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Bot => "⊥",
            Mark::Top => "⊤",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Mark::Bot => "bot",
            Mark::Top => "top",
        }
    }
}

impl From<bool> for Mark {
    fn from(b: bool) -> Self {
        if b {
            Mark::Top
        } else {
            Mark::Bot
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Qualifier annotation on a binding: `^m` (ability systems) or `<f,s>`
/// (ability+effect system).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QualAnnot {
    Single(Mark),
    Pair { fresh: Mark, stored: Mark },
}

/// A surface type annotation together with the qualifier of the value it
/// describes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Annot {
    pub ty: SurfaceType,
    pub qual: Option<QualAnnot>,
}

impl Annot {
    pub fn bare(ty: SurfaceType) -> Self {
        Annot { ty, qual: None }
    }

    pub fn with_qual(ty: SurfaceType, qual: QualAnnot) -> Self {
        Annot {
            ty,
            qual: Some(qual),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceType {
    Bool,
    Ref,
    Fun {
        param: Box<Annot>,
        result: Box<Annot>,
        latent: Option<Mark>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    And,
    Or,
}

impl BinOp {
    pub fn apply(self, lhs: bool, rhs: bool) -> bool {
        match self {
            BinOp::And => lhs && rhs,
            BinOp::Or => lhs || rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Cst(bool),
    Var(String),
    Abs {
        param: String,
        annot: Option<Annot>,
        body: Box<Term>,
    },
    App(Box<Term>, Box<Term>),
    Ref(Box<Term>),
    Get(Box<Term>),
    Put(Box<Term>, Box<Term>),
    Bin(BinOp, Box<Term>, Box<Term>),
    /// Context hole. Only contexts contain holes; parsed programs never do.
    Hole,
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn abs(x: impl Into<String>, annot: Option<Annot>, body: Term) -> Term {
        Term::Abs {
            param: x.into(),
            annot,
            body: Box::new(body),
        }
    }

    pub fn app(f: Term, arg: Term) -> Term {
        Term::App(Box::new(f), Box::new(arg))
    }

    pub fn reference(init: Term) -> Term {
        Term::Ref(Box::new(init))
    }

    pub fn get(t: Term) -> Term {
        Term::Get(Box::new(t))
    }

    pub fn put(target: Term, value: Term) -> Term {
        Term::Put(Box::new(target), Box::new(value))
    }

    pub fn bin(op: BinOp, lhs: Term, rhs: Term) -> Term {
        Term::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// Number of syntax nodes. Holes count zero; annotations are not counted.
    pub fn size(&self) -> usize {
        match self {
            Term::Hole => 0,
            Term::Cst(_) | Term::Var(_) => 1,
            Term::Abs { body, .. } => 1 + body.size(),
            Term::Ref(t) | Term::Get(t) => 1 + t.size(),
            Term::App(a, b) | Term::Put(a, b) | Term::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Term::Hole => 1,
            Term::Cst(_) | Term::Var(_) => 0,
            Term::Abs { body, .. } => body.hole_count(),
            Term::Ref(t) | Term::Get(t) => t.hole_count(),
            Term::App(a, b) | Term::Put(a, b) | Term::Bin(_, a, b) => {
                a.hole_count() + b.hole_count()
            }
        }
    }

    pub fn is_value_form(&self) -> bool {
        matches!(self, Term::Cst(_) | Term::Var(_) | Term::Abs { .. })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print(self))
    }
}

impl fmt::Display for Annot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print_annot(self))
    }
}

pub fn print(t: &Term) -> String {
    printer::print(t)
}

/// `let x = bound in body`, encoded as `(fun x => body) bound`.
pub fn desugar_let(x: impl Into<String>, bound: Term, body: Term) -> Term {
    Term::app(Term::abs(x, None, body), bound)
}

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free<'a>(t: &'a Term, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
    match t {
        Term::Cst(_) | Term::Hole => {}
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        Term::Abs { param, body, .. } => {
            bound.push(param);
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::Ref(t) | Term::Get(t) => collect_free(t, bound, out),
        Term::App(a, b) | Term::Put(a, b) | Term::Bin(_, a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
    }
}

/// Replace every hole in `ctx` with `t`. Plugging does not avoid capture.
pub fn plug(ctx: &Term, t: &Term) -> Term {
    match ctx {
        Term::Hole => t.clone(),
        Term::Cst(_) | Term::Var(_) => ctx.clone(),
        Term::Abs { param, annot, body } => Term::Abs {
            param: param.clone(),
            annot: annot.clone(),
            body: Box::new(plug(body, t)),
        },
        Term::App(a, b) => Term::app(plug(a, t), plug(b, t)),
        Term::Ref(a) => Term::reference(plug(a, t)),
        Term::Get(a) => Term::get(plug(a, t)),
        Term::Put(a, b) => Term::put(plug(a, t), plug(b, t)),
        Term::Bin(op, a, b) => Term::bin(*op, plug(a, t), plug(b, t)),
    }
}

/// Capture-avoiding substitution `t[s/x]`.
pub fn subst(t: &Term, x: &str, s: &Term) -> Term {
    let fv_s = free_vars(s);
    subst_inner(t, x, s, &fv_s)
}

fn subst_inner(t: &Term, x: &str, s: &Term, fv_s: &BTreeSet<String>) -> Term {
    match t {
        Term::Var(y) if y == x => s.clone(),
        Term::Var(_) | Term::Cst(_) | Term::Hole => t.clone(),
        Term::Abs { param, annot, body } => {
            if param == x {
                return t.clone();
            }
            if fv_s.contains(param) {
                let mut avoid = fv_s.clone();
                avoid.extend(free_vars(body));
                avoid.insert(x.to_string());
                let fresh = fresh_name(param, &avoid);
                let renamed = subst_inner(body, param, &Term::Var(fresh.clone()), &BTreeSet::new());
                Term::Abs {
                    param: fresh,
                    annot: annot.clone(),
                    body: Box::new(subst_inner(&renamed, x, s, fv_s)),
                }
            } else {
                Term::Abs {
                    param: param.clone(),
                    annot: annot.clone(),
                    body: Box::new(subst_inner(body, x, s, fv_s)),
                }
            }
        }
        Term::App(a, b) => Term::app(subst_inner(a, x, s, fv_s), subst_inner(b, x, s, fv_s)),
        Term::Ref(a) => Term::reference(subst_inner(a, x, s, fv_s)),
        Term::Get(a) => Term::get(subst_inner(a, x, s, fv_s)),
        Term::Put(a, b) => Term::put(subst_inner(a, x, s, fv_s), subst_inner(b, x, s, fv_s)),
        Term::Bin(op, a, b) => {
            Term::bin(*op, subst_inner(a, x, s, fv_s), subst_inner(b, x, s, fv_s))
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}
