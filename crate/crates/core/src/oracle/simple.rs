//! Simple types: the common erasure of the three systems' type languages.
//! The oracle types terms and contexts here so that its verdicts do not
//! depend on any effect discipline.

use std::fmt;

use crate::ctx::{Ctx, TypeError};
use crate::syntax::{Annot, SurfaceType, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SType {
    Bool,
    Ref,
    Fun(Box<SType>, Box<SType>),
}

pub type SimpleCtx = Ctx<SType>;

impl SType {
    pub fn fun(param: SType, result: SType) -> SType {
        SType::Fun(Box::new(param), Box::new(result))
    }

    pub fn erase(a: &Annot) -> SType {
        match &a.ty {
            SurfaceType::Bool => SType::Bool,
            SurfaceType::Ref => SType::Ref,
            SurfaceType::Fun { param, result, .. } => {
                SType::fun(SType::erase(param), SType::erase(result))
            }
        }
    }

    pub fn to_annot(&self) -> Annot {
        Annot::bare(match self {
            SType::Bool => SurfaceType::Bool,
            SType::Ref => SurfaceType::Ref,
            SType::Fun(p, r) => SurfaceType::Fun {
                param: Box::new(p.to_annot()),
                result: Box::new(r.to_annot()),
                latent: None,
            },
        })
    }

    /// This type and all of its component types.
    pub fn components(&self, out: &mut Vec<SType>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        if let SType::Fun(p, r) = self {
            p.components(out);
            r.components(out);
        }
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_annot(), f)
    }
}

/// Simple type of `t`. Holes, if `hole` is given, have that type.
pub fn simple_type(ctx: &SimpleCtx, t: &Term, hole: Option<&SType>) -> Result<SType, TypeError> {
    synth(&mut ctx.clone(), t, hole)
}

fn expect(ctx: &mut SimpleCtx, t: &Term, hole: Option<&SType>, want: SType) -> Result<(), TypeError> {
    let ty = synth(ctx, t, hole)?;
    if ty == want {
        Ok(())
    } else {
        Err(TypeError::Shape {
            expected: if want == SType::Bool { "Bool" } else { "Ref" },
            found: ty.to_string(),
        })
    }
}

fn synth(ctx: &mut SimpleCtx, t: &Term, hole: Option<&SType>) -> Result<SType, TypeError> {
    match t {
        Term::Cst(_) => Ok(SType::Bool),
        Term::Var(x) => ctx.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Abs { param, annot, body } => {
            let annot = annot
                .as_ref()
                .ok_or_else(|| TypeError::MissingAnnotation(param.clone()))?;
            let pty = SType::erase(annot);
            let rty = ctx.scoped(param, pty.clone(), |c| synth(c, body, hole))?;
            Ok(SType::fun(pty, rty))
        }
        Term::App(f, arg) => {
            if let Term::Abs {
                param,
                annot: None,
                body,
            } = &**f
            {
                let aty = synth(ctx, arg, hole)?;
                return ctx.scoped(param, aty, |c| synth(c, body, hole));
            }
            let fty = synth(ctx, f, hole)?;
            let SType::Fun(pty, rty) = fty else {
                return Err(TypeError::NotAFunction(fty.to_string()));
            };
            let aty = synth(ctx, arg, hole)?;
            if aty != *pty {
                return Err(TypeError::ArgMismatch {
                    expected: pty.to_string(),
                    found: aty.to_string(),
                });
            }
            Ok(*rty)
        }
        Term::Ref(init) => {
            expect(ctx, init, hole, SType::Bool)?;
            Ok(SType::Ref)
        }
        Term::Get(target) => {
            expect(ctx, target, hole, SType::Ref)?;
            Ok(SType::Bool)
        }
        Term::Put(target, value) => {
            expect(ctx, target, hole, SType::Ref)?;
            expect(ctx, value, hole, SType::Bool)?;
            Ok(SType::Bool)
        }
        Term::Bin(_, lhs, rhs) => {
            expect(ctx, lhs, hole, SType::Bool)?;
            expect(ctx, rhs, hole, SType::Bool)?;
            Ok(SType::Bool)
        }
        Term::Hole => hole.cloned().ok_or(TypeError::Hole),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_context};

    #[test]
    fn erases_annotations() {
        let t = parse("fun (f: (Ref<top,bot> -> [top] Bool)) => f").unwrap();
        let ty = simple_type(&SimpleCtx::new(), &t, None).unwrap();
        let f = SType::fun(SType::Ref, SType::Bool);
        assert_eq!(ty, SType::fun(f.clone(), f));
    }

    #[test]
    fn contexts_type_their_holes() {
        let c = parse_context("([] := false) && ![]").unwrap();
        assert_eq!(simple_type(&SimpleCtx::new(), &c, Some(&SType::Ref)).unwrap(), SType::Bool);
        assert!(simple_type(&SimpleCtx::new(), &c, Some(&SType::Bool)).is_err());
        assert!(simple_type(&SimpleCtx::new(), &c, None).is_err());
    }

    #[test]
    fn self_application_is_rejected() {
        let omega = parse("(fun (x: Bool) => x x) (fun (x: Bool) => x x)").unwrap();
        assert!(simple_type(&SimpleCtx::new(), &omega, None).is_err());
    }
}
