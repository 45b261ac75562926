//! Binary effect system: every judgment carries one effect bit recording
//! whether evaluating the term may touch the store.

use std::fmt;

use crate::ctx::{Ctx, TypeError};
use crate::syntax::{Annot, Mark, SurfaceType, Term};

pub type Eff = Mark;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EffType {
    Bool,
    Ref,
    Fun(Box<EffType>, Box<EffType>, Eff),
}

pub type EffCtx = Ctx<EffType>;

impl EffType {
    pub fn fun(param: EffType, result: EffType, latent: Eff) -> EffType {
        EffType::Fun(Box::new(param), Box::new(result), latent)
    }

    pub fn size(&self) -> usize {
        match self {
            EffType::Bool | EffType::Ref => 1,
            EffType::Fun(p, r, _) => 1 + p.size() + r.size(),
        }
    }

    /// Interpret a surface annotation. Qualifiers are ignored; function
    /// annotations must carry a latent effect.
    pub fn from_annot(a: &Annot) -> Result<EffType, TypeError> {
        match &a.ty {
            SurfaceType::Bool => Ok(EffType::Bool),
            SurfaceType::Ref => Ok(EffType::Ref),
            SurfaceType::Fun {
                param,
                result,
                latent,
            } => {
                let latent = latent.ok_or_else(|| TypeError::MissingLatent(a.to_string()))?;
                Ok(EffType::fun(
                    EffType::from_annot(param)?,
                    EffType::from_annot(result)?,
                    latent,
                ))
            }
        }
    }

    pub fn to_annot(&self) -> Annot {
        Annot::bare(match self {
            EffType::Bool => SurfaceType::Bool,
            EffType::Ref => SurfaceType::Ref,
            EffType::Fun(p, r, e) => SurfaceType::Fun {
                param: Box::new(p.to_annot()),
                result: Box::new(r.to_annot()),
                latent: Some(*e),
            },
        })
    }
}

impl fmt::Display for EffType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_annot(), f)
    }
}

/// Sequential composition of effects.
pub fn compose(e1: Eff, e2: Eff) -> Eff {
    e1.join(e2)
}

pub fn subtype_e(t1: &EffType, t2: &EffType) -> bool {
    match (t1, t2) {
        (EffType::Bool, EffType::Bool) | (EffType::Ref, EffType::Ref) => true,
        (EffType::Fun(p1, r1, e1), EffType::Fun(p2, r2, e2)) => {
            subtype_e(p2, p1) && subtype_e(r1, r2) && e1.leq(*e2)
        }
        _ => false,
    }
}

pub fn typecheck_e(ctx: &EffCtx, t: &Term) -> Result<(EffType, Eff), TypeError> {
    synth(&mut ctx.clone(), t)
}

fn expect(ctx: &mut EffCtx, t: &Term, want: EffType, name: &'static str) -> Result<Eff, TypeError> {
    let (ty, e) = synth(ctx, t)?;
    if ty == want {
        Ok(e)
    } else {
        Err(TypeError::Shape {
            expected: name,
            found: ty.to_string(),
        })
    }
}

fn synth(ctx: &mut EffCtx, t: &Term) -> Result<(EffType, Eff), TypeError> {
    match t {
        Term::Cst(_) => Ok((EffType::Bool, Mark::Bot)),
        Term::Var(x) => ctx
            .lookup(x)
            .map(|ty| (ty.clone(), Mark::Bot))
            .ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Abs { param, annot, body } => {
            let annot = annot
                .as_ref()
                .ok_or_else(|| TypeError::MissingAnnotation(param.clone()))?;
            let pty = EffType::from_annot(annot)?;
            let (rty, latent) = ctx.scoped(param, pty.clone(), |c| synth(c, body))?;
            Ok((EffType::fun(pty, rty, latent), Mark::Bot))
        }
        Term::App(f, arg) => {
            if let Term::Abs {
                param,
                annot: None,
                body,
            } = &**f
            {
                // `let`: the binder takes the synthesized type of the bound term.
                let (aty, ea) = synth(ctx, arg)?;
                let (rty, latent) = ctx.scoped(param, aty, |c| synth(c, body))?;
                return Ok((rty, compose(ea, latent)));
            }
            let (fty, ef) = synth(ctx, f)?;
            let EffType::Fun(pty, rty, latent) = fty else {
                return Err(TypeError::NotAFunction(fty.to_string()));
            };
            let (aty, ea) = synth(ctx, arg)?;
            if !subtype_e(&aty, &pty) {
                return Err(TypeError::ArgMismatch {
                    expected: pty.to_string(),
                    found: aty.to_string(),
                });
            }
            Ok((*rty, compose(compose(ef, ea), latent)))
        }
        Term::Ref(init) => {
            expect(ctx, init, EffType::Bool, "Bool")?;
            Ok((EffType::Ref, Mark::Top))
        }
        Term::Get(target) => {
            expect(ctx, target, EffType::Ref, "Ref")?;
            Ok((EffType::Bool, Mark::Top))
        }
        Term::Put(target, value) => {
            expect(ctx, target, EffType::Ref, "Ref")?;
            expect(ctx, value, EffType::Bool, "Bool")?;
            Ok((EffType::Bool, Mark::Top))
        }
        Term::Bin(_, lhs, rhs) => {
            let e1 = expect(ctx, lhs, EffType::Bool, "Bool")?;
            let e2 = expect(ctx, rhs, EffType::Bool, "Bool")?;
            Ok((EffType::Bool, compose(e1, e2)))
        }
        Term::Hole => Err(TypeError::Hole),
    }
}

pub fn is_pure_e(ctx: &EffCtx, t: &Term) -> Result<bool, TypeError> {
    Ok(typecheck_e(ctx, t)?.1 == Mark::Bot)
}

/// `T ; effect`.
pub fn print_judgment(ty: &EffType, e: Eff) -> String {
    format!("{ty} ; {e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use Mark::{Bot, Top};

    fn a_ref() -> EffCtx {
        EffCtx::new().with("a", EffType::Ref)
    }

    fn check(ctx: &EffCtx, src: &str) -> (EffType, Eff) {
        typecheck_e(ctx, &parse(src).unwrap()).unwrap()
    }

    #[test]
    fn compose_is_lub() {
        assert_eq!(compose(Bot, Bot), Bot);
        assert_eq!(compose(Bot, Top), Top);
        assert_eq!(compose(Top, Top), Top);
        assert_eq!(compose(Top, Bot), Top);
    }

    #[test]
    fn synthesis_examples() {
        assert_eq!(check(&EffCtx::new(), "ref true"), (EffType::Ref, Top));
        assert_eq!(
            check(&a_ref(), "fun (x: Bool) => !a"),
            (EffType::fun(EffType::Bool, EffType::Bool, Top), Bot)
        );
        assert_eq!(check(&a_ref(), "a"), (EffType::Ref, Bot));
    }

    #[test]
    fn subtyping_examples() {
        let f = |e| EffType::fun(EffType::Bool, EffType::Bool, e);
        assert!(subtype_e(&EffType::Bool, &EffType::Bool));
        assert!(subtype_e(&f(Bot), &f(Top)));
        assert!(!subtype_e(&f(Top), &f(Bot)));
        assert!(!subtype_e(&EffType::Bool, &EffType::Ref));
    }

    #[test]
    fn purity_examples() {
        let empty = EffCtx::new();
        let pure = |ctx: &EffCtx, src: &str| is_pure_e(ctx, &parse(src).unwrap()).unwrap();
        assert!(pure(&empty, "fun (x: Bool) => x"));
        assert!(!pure(&empty, "let x = ref true in !x"));
        assert!(pure(&a_ref(), "(fun (x: Bool) => a) true"));
    }

    #[test]
    fn higher_order_argument_uses_subsumption() {
        let src = "(fun (f: (Bool -> [top] Bool)) => f true) (fun (x: Bool) => x)";
        assert_eq!(check(&EffCtx::new(), src), (EffType::Bool, Top));
        let bad = "(fun (f: (Bool -> [bot] Bool)) => f true) (fun (x: Bool) => !(ref x))";
        assert!(matches!(
            typecheck_e(&EffCtx::new(), &parse(bad).unwrap()),
            Err(TypeError::ArgMismatch { .. })
        ));
    }

    #[test]
    fn errors() {
        let err = |src: &str| typecheck_e(&EffCtx::new(), &parse(src).unwrap()).unwrap_err();
        assert_eq!(err("x"), TypeError::Unbound("x".into()));
        assert_eq!(err("fun (x) => x"), TypeError::MissingAnnotation("x".into()));
        assert!(matches!(err("fun (f: (Bool -> Bool)) => true"), TypeError::MissingLatent(_)));
        assert!(matches!(err("true true"), TypeError::NotAFunction(_)));
        assert!(matches!(err("ref (ref true)"), TypeError::Shape { .. }));
        assert!(matches!(err("!true"), TypeError::Shape { .. }));
    }

    #[test]
    fn printing() {
        let t = EffType::fun(EffType::Bool, EffType::Bool, Top);
        assert_eq!(print_judgment(&t, Bot), "(Bool -> [top] Bool) ; bot");
    }
}
