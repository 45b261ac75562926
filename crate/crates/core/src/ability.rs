//! Binary ability system: every binding and result carries one ability bit
//! recording whether the value is, or can reach, a resource.

use std::collections::BTreeSet;
use std::fmt;

use crate::ctx::{Ctx, TypeError};
use crate::syntax::{free_vars, Annot, Mark, QualAnnot, SurfaceType, Term};

pub type Abil = Mark;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbilType {
    Bool,
    Ref,
    Fun {
        param: Box<AbilType>,
        param_abil: Abil,
        result: Box<AbilType>,
        result_abil: Abil,
    },
}

pub type AbilCtx = Ctx<(AbilType, Abil)>;

impl AbilType {
    pub fn fun(param: AbilType, param_abil: Abil, result: AbilType, result_abil: Abil) -> AbilType {
        AbilType::Fun {
            param: Box::new(param),
            param_abil,
            result: Box::new(result),
            result_abil,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AbilType::Bool | AbilType::Ref => 1,
            AbilType::Fun { param, result, .. } => 1 + param.size() + result.size(),
        }
    }

    /// Ability assumed when an annotation omits it: references are
    /// resources, everything else is not.
    pub fn default_abil(&self) -> Abil {
        match self {
            AbilType::Ref => Mark::Top,
            AbilType::Bool | AbilType::Fun { .. } => Mark::Bot,
        }
    }

    /// Interpret an annotation as a type and binding ability. Latent effects
    /// are ignored; pair qualifiers are rejected.
    pub fn from_annot(a: &Annot) -> Result<(AbilType, Abil), TypeError> {
        let ty = match &a.ty {
            SurfaceType::Bool => AbilType::Bool,
            SurfaceType::Ref => AbilType::Ref,
            SurfaceType::Fun { param, result, .. } => {
                let (p, pa) = AbilType::from_annot(param)?;
                let (r, ra) = AbilType::from_annot(result)?;
                AbilType::fun(p, pa, r, ra)
            }
        };
        let abil = match a.qual {
            None => ty.default_abil(),
            Some(QualAnnot::Single(m)) => m,
            Some(QualAnnot::Pair { .. }) => return Err(TypeError::QualifierForm(a.to_string())),
        };
        Ok((ty, abil))
    }

    pub fn to_annot(&self, abil: Abil) -> Annot {
        let ty = match self {
            AbilType::Bool => SurfaceType::Bool,
            AbilType::Ref => SurfaceType::Ref,
            AbilType::Fun {
                param,
                param_abil,
                result,
                result_abil,
            } => SurfaceType::Fun {
                param: Box::new(param.to_annot(*param_abil)),
                result: Box::new(result.to_annot(*result_abil)),
                latent: None,
            },
        };
        Annot::with_qual(ty, QualAnnot::Single(abil))
    }
}

/// Types print with their component abilities but without an outer one.
impl fmt::Display for AbilType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut a = self.to_annot(Mark::Bot);
        a.qual = None;
        fmt::Display::fmt(&a, f)
    }
}

/// Least upper bound of the abilities of `xs` in `ctx`.
pub fn ambient<'a>(
    ctx: &AbilCtx,
    xs: impl IntoIterator<Item = &'a String>,
) -> Result<Abil, TypeError> {
    xs.into_iter().try_fold(Mark::Bot, |acc, x| {
        ctx.lookup(x)
            .map(|(_, a)| acc.join(*a))
            .ok_or_else(|| TypeError::Unbound(x.clone()))
    })
}

pub fn subtype_a(t1: &AbilType, t2: &AbilType) -> bool {
    match (t1, t2) {
        (AbilType::Bool, AbilType::Bool) | (AbilType::Ref, AbilType::Ref) => true,
        (
            AbilType::Fun {
                param: p1,
                param_abil: a1,
                result: r1,
                result_abil: a2,
            },
            AbilType::Fun {
                param: p2,
                param_abil: a3,
                result: r2,
                result_abil: a4,
            },
        ) => subtype_a(p2, p1) && a3.leq(*a1) && subtype_a(r1, r2) && a2.leq(*a4),
        _ => false,
    }
}

pub fn typecheck_a(ctx: &AbilCtx, t: &Term) -> Result<(AbilType, Abil), TypeError> {
    synth(&mut ctx.clone(), t)
}

fn expect(ctx: &mut AbilCtx, t: &Term, want: AbilType, name: &'static str) -> Result<(), TypeError> {
    let (ty, _) = synth(ctx, t)?;
    if ty == want {
        Ok(())
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

fn synth(ctx: &mut AbilCtx, t: &Term) -> Result<(AbilType, Abil), TypeError> {
    match t {
        Term::Cst(_) => Ok((AbilType::Bool, Mark::Bot)),
        Term::Var(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Abs { param, annot, body } => {
            let annot = annot
                .as_ref()
                .ok_or_else(|| TypeError::MissingAnnotation(param.clone()))?;
            let (pty, pa) = AbilType::from_annot(annot)?;
            let (rty, ra) = ctx.scoped(param, (pty.clone(), pa), |c| synth(c, body))?;
            let af = ambient(ctx, &captured(param, body))?;
            Ok((AbilType::fun(pty, pa, rty, ra), af))
        }
        Term::App(f, arg) => {
            if let Term::Abs {
                param,
                annot: None,
                body,
            } = &**f
            {
                // `let`: the binder takes the synthesized type and ability of
                // the bound term.
                let bound = synth(ctx, arg)?;
                return ctx.scoped(param, bound, |c| synth(c, body));
            }
            let (fty, _) = synth(ctx, f)?;
            let AbilType::Fun {
                param,
                param_abil,
                result,
                result_abil,
            } = fty
            else {
                return Err(TypeError::NotAFunction(fty.to_string()));
            };
            let (aty, aa) = synth(ctx, arg)?;
            if !subtype_a(&aty, &param) || !aa.leq(param_abil) {
                return Err(TypeError::ArgMismatch {
                    expected: param.to_annot(param_abil).to_string(),
                    found: aty.to_annot(aa).to_string(),
                });
            }
            Ok((*result, result_abil))
        }
        Term::Ref(init) => {
            expect(ctx, init, AbilType::Bool, "Bool")?;
            Ok((AbilType::Ref, Mark::Top))
        }
        Term::Get(target) => {
            expect(ctx, target, AbilType::Ref, "Ref")?;
            Ok((AbilType::Bool, Mark::Bot))
        }
        Term::Put(target, value) => {
            expect(ctx, target, AbilType::Ref, "Ref")?;
            expect(ctx, value, AbilType::Bool, "Bool")?;
            Ok((AbilType::Bool, Mark::Bot))
        }
        Term::Bin(_, lhs, rhs) => {
            expect(ctx, lhs, AbilType::Bool, "Bool")?;
            expect(ctx, rhs, AbilType::Bool, "Bool")?;
            Ok((AbilType::Bool, Mark::Bot))
        }
        Term::Hole => Err(TypeError::Hole),
    }
}

/// Full judgment: type, ability, and the ambient ability of the term's free
/// variables.
pub fn judge_a(ctx: &AbilCtx, t: &Term) -> Result<(AbilType, Abil, Abil), TypeError> {
    let (ty, a) = typecheck_a(ctx, t)?;
    let amb = ambient(ctx, &free_vars(t))?;
    Ok((ty, a, amb))
}

/// Pure when both the result ability and the ambient ability are bottom.
pub fn is_pure_a(ctx: &AbilCtx, t: &Term) -> Result<bool, TypeError> {
    let (_, a, amb) = judge_a(ctx, t)?;
    Ok(a == Mark::Bot && amb == Mark::Bot)
}

/// `T ; ability ; ambient`.
pub fn print_judgment(ty: &AbilType, a: Abil, ambient: Abil) -> String {
    format!("{ty} ; {a} ; {ambient}")
}
