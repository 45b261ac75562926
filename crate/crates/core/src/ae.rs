//! Combined ability and effect system. Qualifiers split the ability bit into
//! a fresh component (the value may reach cells allocated by the term itself)
//! and a stored component (it may reach cells that existed beforehand). An
//! effect on a fresh cell is invisible outside the term and is masked.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ctx::{Ctx, TypeError};
use crate::effect::Eff;
use crate::syntax::{free_vars, Annot, Mark, QualAnnot, SurfaceType, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Qual {
    pub fresh: Mark,
    pub stored: Mark,
}

impl Qual {
    pub const BOT: Qual = Qual::new(Mark::Bot, Mark::Bot);
    pub const TOP: Qual = Qual::new(Mark::Top, Mark::Top);

    pub const fn new(fresh: Mark, stored: Mark) -> Qual {
        Qual { fresh, stored }
    }

    /// `⟨m,m⟩`.
    pub const fn uniform(m: Mark) -> Qual {
        Qual::new(m, m)
    }

    pub fn join(self, other: Qual) -> Qual {
        Qual::new(self.fresh.join(other.fresh), self.stored.join(other.stored))
    }

    /// Figure notation: `⟨⊥⟩` for bottom, `⟨f,s⟩` otherwise.
    pub fn symbolic(self) -> String {
        if self == Qual::BOT {
            "⟨⊥⟩".to_string()
        } else {
            format!("⟨{},{}⟩", self.fresh.symbol(), self.stored.symbol())
        }
    }
}

impl fmt::Display for Qual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.fresh, self.stored)
    }
}

pub fn sub_qual(a1: Qual, a2: Qual) -> bool {
    a1.fresh.leq(a2.fresh) && a1.stored.leq(a2.stored)
}

pub fn sub_eff(e1: Eff, e2: Eff) -> bool {
    e1.leq(e2)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AEType {
    Bool,
    Ref,
    Fun {
        param: Box<AEType>,
        param_qual: Qual,
        result: Box<AEType>,
        result_qual: Qual,
        latent: Eff,
    },
}

pub type AECtx = Ctx<(AEType, Qual)>;

impl AEType {
    pub fn fun(param: AEType, param_qual: Qual, result: AEType, result_qual: Qual, latent: Eff) -> AEType {
        AEType::Fun {
            param: Box::new(param),
            param_qual,
            result: Box::new(result),
            result_qual,
            latent,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AEType::Bool | AEType::Ref => 1,
            AEType::Fun { param, result, .. } => 1 + param.size() + result.size(),
        }
    }

    /// Qualifier assumed when an annotation omits it: a reference binding is
    /// a fresh resource, everything else carries nothing.
    pub fn default_qual(&self) -> Qual {
        match self {
            AEType::Ref => Qual::new(Mark::Top, Mark::Bot),
            AEType::Bool | AEType::Fun { .. } => Qual::BOT,
        }
    }

    /// Interpret an annotation as a type and binding qualifier. A single mark
    /// `^m` stands for `<m,m>`; function annotations need a latent effect.
    pub fn from_annot(a: &Annot) -> Result<(AEType, Qual), TypeError> {
        let ty = match &a.ty {
            SurfaceType::Bool => AEType::Bool,
            SurfaceType::Ref => AEType::Ref,
            SurfaceType::Fun {
                param,
                result,
                latent,
            } => {
                let latent = latent.ok_or_else(|| TypeError::MissingLatent(a.to_string()))?;
                let (p, pq) = AEType::from_annot(param)?;
                let (r, rq) = AEType::from_annot(result)?;
                AEType::fun(p, pq, r, rq, latent)
            }
        };
        let qual = match a.qual {
            None => ty.default_qual(),
            Some(QualAnnot::Single(m)) => Qual::uniform(m),
            Some(QualAnnot::Pair { fresh, stored }) => Qual::new(fresh, stored),
        };
        Ok((ty, qual))
    }

    pub fn to_annot(&self, q: Qual) -> Annot {
        let ty = match self {
            AEType::Bool => SurfaceType::Bool,
            AEType::Ref => SurfaceType::Ref,
            AEType::Fun {
                param,
                param_qual,
                result,
                result_qual,
                latent,
            } => SurfaceType::Fun {
                param: Box::new(param.to_annot(*param_qual)),
                result: Box::new(result.to_annot(*result_qual)),
                latent: Some(*latent),
            },
        };
        Annot::with_qual(
            ty,
            QualAnnot::Pair {
                fresh: q.fresh,
                stored: q.stored,
            },
        )
    }

    /// Figure notation, e.g. `(Bool ⟨⊥⟩ =>^⊥ Ref ⟨⊤,⊥⟩)`.
    pub fn symbolic(&self) -> String {
        match self {
            AEType::Bool => "Bool".to_string(),
            AEType::Ref => "Ref".to_string(),
            AEType::Fun {
                param,
                param_qual,
                result,
                result_qual,
                latent,
            } => format!(
                "({} =>^{} {})",
                symbolic_slot(param, *param_qual),
                latent.symbol(),
                symbolic_slot(result, *result_qual)
            ),
        }
    }
}

fn symbolic_slot(ty: &AEType, q: Qual) -> String {
    match ty {
        AEType::Fun { .. } => format!("({} {})", ty.symbolic(), q.symbolic()),
        _ => symbolic_binding(ty, q),
    }
}

/// `T a` in figure notation.
pub fn symbolic_binding(ty: &AEType, q: Qual) -> String {
    format!("{} {}", ty.symbolic(), q.symbolic())
}

/// `T a e` in figure notation.
pub fn symbolic_judgment(ty: &AEType, q: Qual, e: Eff) -> String {
    format!("{} {}", symbolic_binding(ty, q), e.symbol())
}

/// Types print with their component qualifiers but without an outer one.
impl fmt::Display for AEType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut a = self.to_annot(Qual::BOT);
        a.qual = None;
        fmt::Display::fmt(&a, f)
    }
}

pub fn subtype_ae(t1: &AEType, t2: &AEType) -> bool {
    match (t1, t2) {
        (AEType::Bool, AEType::Bool) | (AEType::Ref, AEType::Ref) => true,
        (
            AEType::Fun {
                param: p1,
                param_qual: a1,
                result: r1,
                result_qual: a2,
                latent: e1,
            },
            AEType::Fun {
                param: p2,
                param_qual: a3,
                result: r2,
                result_qual: a4,
                latent: e2,
            },
        ) => {
            subtype_ae(p2, p1)
                && sub_qual(*a3, *a1)
                && subtype_ae(r1, r2)
                && sub_qual(*a2, *a4)
                && sub_eff(*e1, *e2)
        }
        _ => false,
    }
}

/// Componentwise least upper bound of the qualifiers of `xs` in `ctx`.
pub fn ambient_ae<'a>(
    ctx: &AECtx,
    xs: impl IntoIterator<Item = &'a String>,
) -> Result<Qual, TypeError> {
    xs.into_iter().try_fold(Qual::BOT, |acc, x| {
        ctx.lookup(x)
            .map(|(_, q)| acc.join(*q))
            .ok_or_else(|| TypeError::Unbound(x.clone()))
    })
}

/// Qualifier of an abstraction with captured ambient `af`, result qualifier
/// `a2` and latent effect `e2`. The closure only counts as a resource when it
/// captures one and can either return or use stored cells.
pub fn abs_qualifier(af: Qual, a2: Qual, e2: Eff) -> Qual {
    let captures = af.fresh.is_top() || af.stored.is_top();
    let exposes = a2.stored.is_top() || e2.is_top();
    Qual::new(Mark::Bot, Mark::from(captures && exposes))
}

/// Qualifier and effect of applying a function with qualifier `af` and
/// effect `ef` to an argument with qualifier `a1` and effect `e1`, where the
/// function type has result qualifier `a2` and latent effect `e2`.
pub fn app_qualifier(af: Qual, ef: Eff, a1: Qual, e1: Eff, a2: Qual, e2: Eff) -> (Qual, Eff) {
    let reaches_fresh = af.fresh.is_top() || a1.fresh.is_top();
    let reaches_stored = af.stored.is_top() || a1.stored.is_top();
    let fresh = a2.fresh.is_top() || (a2.stored.is_top() && reaches_fresh);
    let stored = a2.stored.is_top() && reaches_stored;
    let effect = ef.is_top() || e1.is_top() || (e2.is_top() && reaches_stored);
    (Qual::new(fresh.into(), stored.into()), effect.into())
}

pub fn typecheck_ae(ctx: &AECtx, t: &Term) -> Result<(AEType, Qual, Eff), TypeError> {
    synth(&mut ctx.clone(), t)
}

fn expect(
    ctx: &mut AECtx,
    t: &Term,
    want: AEType,
    name: &'static str,
) -> Result<(Qual, Eff), TypeError> {
    let (ty, q, e) = synth(ctx, t)?;
    if ty == want {
        Ok((q, e))
    } else {
        Err(TypeError::Shape {
            expected: name,
            found: ty.to_string(),
        })
    }
}

fn captured(param: &str, body: &Term) -> BTreeSet<String> {
    let mut fv = free_vars(body);
    fv.remove(param);
    fv
}

/// Type an abstraction whose parameter is declared at `(pty, pq)`.
fn abstraction(
    ctx: &mut AECtx,
    param: &str,
    pty: AEType,
    pq: Qual,
    body: &Term,
) -> Result<(AEType, Qual), TypeError> {
    let (rty, rq, latent) = ctx.scoped(param, (pty.clone(), pq), |c| synth(c, body))?;
    let af = ambient_ae(ctx, &captured(param, body))?;
    let q = abs_qualifier(af, rq, latent);
    Ok((AEType::fun(pty, pq, rty, rq, latent), q))
}

fn synth(ctx: &mut AECtx, t: &Term) -> Result<(AEType, Qual, Eff), TypeError> {
    match t {
        Term::Cst(_) => Ok((AEType::Bool, Qual::BOT, Mark::Bot)),
        Term::Var(x) => {
            let (ty, q) = ctx
                .lookup(x)
                .cloned()
                .ok_or_else(|| TypeError::Unbound(x.clone()))?;
            let stored = q.fresh.join(q.stored);
            Ok((ty, Qual::new(Mark::Bot, stored), Mark::Bot))
        }
        Term::Abs { param, annot, body } => {
            let annot = annot
                .as_ref()
                .ok_or_else(|| TypeError::MissingAnnotation(param.clone()))?;
            let (pty, pq) = AEType::from_annot(annot)?;
            let (ty, q) = abstraction(ctx, param, pty, pq, body)?;
            Ok((ty, q, Mark::Bot))
        }
        Term::App(f, arg) => {
            if let Term::Abs {
                param,
                annot: None,
                body,
            } = &**f
            {
                // `let`: the binder is declared at the synthesized type and
                // qualifier of the bound term.
                let (aty, aq, ae) = synth(ctx, arg)?;
                let (fty, fq) = abstraction(ctx, param, aty, aq, body)?;
                let AEType::Fun {
                    result_qual,
                    result,
                    latent,
                    ..
                } = fty
                else {
                    unreachable!("abstractions have function types")
                };
                let (q, e) = app_qualifier(fq, Mark::Bot, aq, ae, result_qual, latent);
                return Ok((*result, q, e));
            }
            let (fty, fq, fe) = synth(ctx, f)?;
            let AEType::Fun {
                param,
                param_qual,
                result,
                result_qual,
                latent,
            } = fty
            else {
                return Err(TypeError::NotAFunction(fty.to_string()));
            };
            let (aty, aq, ae) = synth(ctx, arg)?;
            if !subtype_ae(&aty, &param) || !sub_qual(aq, param_qual) {
                return Err(TypeError::ArgMismatch {
                    expected: param.to_annot(param_qual).to_string(),
                    found: aty.to_annot(aq).to_string(),
                });
            }
            // The function type may be weakened contravariantly to take the
            // argument at its own qualifier, which gives the least result.
            let (q, e) = app_qualifier(fq, fe, aq, ae, result_qual, latent);
            Ok((*result, q, e))
        }
        Term::Ref(init) => {
            let (_, e) = expect(ctx, init, AEType::Bool, "Bool")?;
            Ok((AEType::Ref, Qual::new(Mark::Top, Mark::Bot), e))
        }
        Term::Get(target) => {
            let (q, e) = expect(ctx, target, AEType::Ref, "Ref")?;
            Ok((AEType::Bool, Qual::BOT, e.join(q.stored)))
        }
        Term::Put(target, value) => {
            let (q1, e1) = expect(ctx, target, AEType::Ref, "Ref")?;
            let (_, e2) = expect(ctx, value, AEType::Bool, "Bool")?;
            Ok((AEType::Bool, Qual::BOT, e1.join(e2).join(q1.stored)))
        }
        Term::Bin(_, lhs, rhs) => {
            let (_, e1) = expect(ctx, lhs, AEType::Bool, "Bool")?;
            let (_, e2) = expect(ctx, rhs, AEType::Bool, "Bool")?;
            Ok((AEType::Bool, Qual::BOT, e1.join(e2)))
        }
        Term::Hole => Err(TypeError::Hole),
    }
}

/// Check `t` against a given judgment, allowing subsumption from the
/// synthesized one.
pub fn check_against(
    ctx: &AECtx,
    t: &Term,
    ty: &AEType,
    q: Qual,
    e: Eff,
) -> Result<bool, TypeError> {
    let (sty, sq, se) = typecheck_ae(ctx, t)?;
    Ok(subtype_ae(&sty, ty) && sub_qual(sq, q) && sub_eff(se, e))
}

/// Pure when the term has no effect and its result reaches no fresh cell.
pub fn is_pure_ae(ctx: &AECtx, t: &Term) -> Result<bool, TypeError> {
    let (_, q, e) = typecheck_ae(ctx, t)?;
    Ok(e == Mark::Bot && q.fresh == Mark::Bot)
}

/// [`is_pure_ae`], additionally requiring a bottom ambient qualifier when the
/// result may reach stored cells.
pub fn is_pure_ae_strict(ctx: &AECtx, t: &Term) -> Result<bool, TypeError> {
    let (_, q, e) = typecheck_ae(ctx, t)?;
    if e.is_top() || q.fresh.is_top() {
        return Ok(false);
    }
    Ok(!q.stored.is_top() || ambient_ae(ctx, &free_vars(t))? == Qual::BOT)
}

/// `T ; <f,s> ; effect`.
pub fn print_judgment(ty: &AEType, q: Qual, e: Eff) -> String {
    format!("{ty} ; {q} ; {e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use Mark::{Bot, Top};

    const FRESH: Qual = Qual::new(Top, Bot);
    const STORED: Qual = Qual::new(Bot, Top);

    fn a_ref() -> AECtx {
        AECtx::new().with("a", (AEType::Ref, FRESH))
    }

    fn check(ctx: &AECtx, src: &str) -> (AEType, Qual, Eff) {
        typecheck_ae(ctx, &parse(src).unwrap()).unwrap()
    }

    #[test]
    fn ambient_examples() {
        let none: [String; 0] = [];
        assert_eq!(ambient_ae(&AECtx::new(), &none).unwrap(), Qual::BOT);
        assert_eq!(ambient_ae(&a_ref(), &["a".to_string()]).unwrap(), FRESH);
        let ctx = a_ref().with("y", (AEType::Bool, Qual::BOT));
        let both = ["a".to_string(), "y".to_string()];
        assert_eq!(ambient_ae(&ctx, &both).unwrap(), FRESH);
    }

    #[test]
    fn abs_qualifier_examples() {
        for a2 in [Qual::BOT, FRESH, STORED, Qual::TOP] {
            for e2 in [Bot, Top] {
                assert_eq!(abs_qualifier(Qual::BOT, a2, e2), Qual::BOT);
            }
        }
        assert_eq!(abs_qualifier(STORED, Qual::BOT, Top), STORED);
        assert_eq!(abs_qualifier(STORED, Qual::BOT, Bot), Qual::BOT);
    }

    #[test]
    fn app_qualifier_examples() {
        assert_eq!(
            app_qualifier(Qual::BOT, Bot, Qual::BOT, Bot, Qual::BOT, Top),
            (Qual::BOT, Bot)
        );
        // id(y)
        assert_eq!(
            app_qualifier(Qual::BOT, Bot, Qual::BOT, Bot, Qual::BOT, Bot),
            (Qual::BOT, Bot)
        );
        // usearg(a)
        assert_eq!(
            app_qualifier(Qual::BOT, Bot, STORED, Bot, Qual::BOT, Top),
            (Qual::BOT, Top)
        );
    }

    #[test]
    fn synthesis_examples() {
        assert_eq!(
            check(&AECtx::new(), "fun (x: Bool) => ref x"),
            (AEType::fun(AEType::Bool, Qual::BOT, AEType::Ref, FRESH, Bot), Qual::BOT, Bot)
        );
        let (ty, q, _) = check(&a_ref(), "fun (x: Bool) => a");
        assert_eq!(q, STORED);
        match ty {
            AEType::Fun { result_qual, .. } => assert_eq!(result_qual, STORED),
            other => panic!("{other}"),
        }
        assert_eq!(
            check(&a_ref(), "(fun (x: Ref<bot,top>) => true) a"),
            (AEType::Bool, Qual::BOT, Bot)
        );
    }

    #[test]
    fn subtyping_examples() {
        assert!(sub_qual(Qual::BOT, Qual::TOP));
        assert!(!sub_qual(FRESH, STORED));
        let f = |e| AEType::fun(AEType::Bool, Qual::BOT, AEType::Bool, Qual::BOT, e);
        // Latent effects are covariant.
        assert!(subtype_ae(&f(Bot), &f(Top)));
        assert!(!subtype_ae(&f(Top), &f(Bot)));
        let g = |pq| AEType::fun(AEType::Ref, pq, AEType::Bool, Qual::BOT, Bot);
        assert!(subtype_ae(&g(Qual::TOP), &g(FRESH)));
        assert!(!subtype_ae(&g(FRESH), &g(Qual::TOP)));
    }

    #[test]
    fn purity_examples() {
        let pure = |ctx: &AECtx, src: &str| is_pure_ae(ctx, &parse(src).unwrap()).unwrap();
        assert!(pure(&AECtx::new(), "let x = ref true in !x"));
        assert!(pure(&AECtx::new(), "let x = ref true in x := false"));
        assert!(!pure(&AECtx::new(), "ref true"));
        assert!(!pure(&a_ref(), "!a"));
        assert!(!pure(&a_ref(), "a := true"));
        assert!(pure(&a_ref(), "(fun (x: Bool) => a) true"));
        assert!(pure(&a_ref(), "let x = a in true"));
        assert!(!pure(&a_ref(), "(fun (x: Bool) => !a) true"));
    }

    #[test]
    fn strict_purity_checks_ambient() {
        let t = parse("(fun (x: Bool) => a) true").unwrap();
        assert!(is_pure_ae(&a_ref(), &t).unwrap());
        assert!(!is_pure_ae_strict(&a_ref(), &t).unwrap());
        let masked = parse("let x = ref true in !x").unwrap();
        assert!(is_pure_ae_strict(&AECtx::new(), &masked).unwrap());
    }

    #[test]
    fn check_against_allows_subsumption() {
        let t = parse("ref true").unwrap();
        assert!(check_against(&AECtx::new(), &t, &AEType::Ref, Qual::TOP, Top).unwrap());
        assert!(!check_against(&AECtx::new(), &t, &AEType::Ref, STORED, Top).unwrap());
    }

    #[test]
    fn printing() {
        let t = AEType::fun(AEType::Bool, Qual::BOT, AEType::Ref, FRESH, Bot);
        assert_eq!(
            print_judgment(&t, Qual::BOT, Bot),
            "(Bool<bot,bot> -> [bot] Ref<top,bot>) ; <bot,bot> ; bot"
        );
        assert_eq!(symbolic_binding(&t, Qual::BOT), "(Bool ⟨⊥⟩ =>^⊥ Ref ⟨⊤,⊥⟩) ⟨⊥⟩");
        let nested = AEType::fun(AEType::Ref, FRESH, t.clone(), STORED, Bot);
        assert_eq!(
            nested.symbolic(),
            "(Ref ⟨⊤,⊥⟩ =>^⊥ ((Bool ⟨⊥⟩ =>^⊥ Ref ⟨⊤,⊥⟩) ⟨⊥,⊤⟩))"
        );
        let reparsed = crate::syntax::parse_annot(&t.to_annot(FRESH).to_string()).unwrap();
        assert_eq!(AEType::from_annot(&reparsed).unwrap(), (t, FRESH));
    }
}
