use super::{Annot, QualAnnot, SurfaceType, Term};

// Precedence levels, loosest first.
const EXPR: u8 = 0;
const BINARY: u8 = 1;
const PUT: u8 = 2;
const APP: u8 = 3;
const PREFIX: u8 = 4;
const ATOM: u8 = 5;

pub(super) fn print(t: &Term) -> String {
    let mut out = String::new();
    term(t, EXPR, &mut out);
    out
}

pub(super) fn print_annot(a: &Annot) -> String {
    let mut out = String::new();
    annot(a, &mut out);
    out
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Cst(_) | Term::Var(_) | Term::Hole => ATOM,
        Term::Abs { .. } => EXPR,
        Term::App(f, _) if is_let(f) => EXPR,
        Term::App(..) => APP,
        Term::Ref(_) | Term::Get(_) => PREFIX,
        Term::Put(..) => PUT,
        Term::Bin(..) => BINARY,
    }
}

fn is_let(f: &Term) -> bool {
    matches!(f, Term::Abs { annot: None, .. })
}

fn term(t: &Term, min: u8, out: &mut String) {
    let parens = level(t) < min;
    if parens {
        out.push('(');
    }
    match t {
        Term::Cst(b) => out.push_str(if *b { "true" } else { "false" }),
        Term::Var(x) => out.push_str(x),
        Term::Hole => out.push_str("[]"),
        Term::Abs { param, annot: a, body } => {
            out.push_str("fun (");
            out.push_str(param);
            if let Some(a) = a {
                out.push_str(": ");
                annot(a, out);
            }
            out.push_str(") => ");
            term(body, EXPR, out);
        }
        Term::App(f, arg) => match &**f {
            Term::Abs {
                param,
                annot: None,
                body,
            } => {
                out.push_str("let ");
                out.push_str(param);
                out.push_str(" = ");
                term(arg, EXPR, out);
                out.push_str(" in ");
                term(body, EXPR, out);
            }
            _ => {
                term(f, APP, out);
                out.push(' ');
                term(arg, ATOM, out);
            }
        },
        Term::Ref(inner) => {
            out.push_str("ref ");
            term(inner, ATOM, out);
        }
        Term::Get(inner) => {
            out.push('!');
            term(inner, ATOM, out);
        }
        Term::Put(target, value) => {
            term(target, APP, out);
            out.push_str(" := ");
            term(value, APP, out);
        }
        Term::Bin(op, l, r) => {
            term(l, BINARY, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            term(r, PUT, out);
        }
    }
    if parens {
        out.push(')');
    }
}

fn annot(a: &Annot, out: &mut String) {
    match &a.ty {
        SurfaceType::Bool => out.push_str("Bool"),
        SurfaceType::Ref => out.push_str("Ref"),
        SurfaceType::Fun {
            param,
            result,
            latent,
        } => {
            out.push('(');
            annot(param, out);
            out.push_str(" -> ");
            if let Some(m) = latent {
                out.push('[');
                out.push_str(m.keyword());
                out.push_str("] ");
            }
            annot(result, out);
            out.push(')');
        }
    }
    match a.qual {
        None => {}
        Some(QualAnnot::Single(m)) => {
            out.push('^');
            out.push_str(m.keyword());
        }
        Some(QualAnnot::Pair { fresh, stored }) => {
            out.push('<');
            out.push_str(fresh.keyword());
            out.push(',');
            out.push_str(stored.keyword());
            out.push('>');
        }
    }
}
