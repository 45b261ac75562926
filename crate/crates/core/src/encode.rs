//! Translations of effect-system and ability-system judgments into the
//! combined system. Terms are shared, so only types, contexts and parameter
//! annotations are translated.

use serde::Serialize;

use crate::ability::{typecheck_a, AbilCtx, AbilType};
use crate::ae::{self, check_against, typecheck_ae, AECtx, AEType, Qual};
use crate::effect::{self, typecheck_e, EffCtx, EffType};
use crate::syntax::{Annot, Mark, Term};
use crate::system::System;

/// Effect-system types translate with every component qualifier at `<top,top>`.
pub fn encode_type_e(t: &EffType) -> AEType {
    match t {
        EffType::Bool => AEType::Bool,
        EffType::Ref => AEType::Ref,
        EffType::Fun(p, r, e) => AEType::fun(encode_type_e(p), Qual::TOP, encode_type_e(r), Qual::TOP, *e),
    }
}

/// Ability-system types translate ability `a` to `<a,a>` and every latent
/// effect to top.
pub fn encode_type_a(t: &AbilType) -> AEType {
    match t {
        AbilType::Bool => AEType::Bool,
        AbilType::Ref => AEType::Ref,
        AbilType::Fun {
            param,
            param_abil,
            result,
            result_abil,
        } => AEType::fun(
            encode_type_a(param),
            Qual::uniform(*param_abil),
            encode_type_a(result),
            Qual::uniform(*result_abil),
            Mark::Top,
        ),
    }
}

pub fn encode_env_e(ctx: &EffCtx) -> AECtx {
    ctx.iter()
        .map(|(x, t)| (x, (encode_type_e(t), Qual::TOP)))
        .collect()
}

pub fn encode_env_a(ctx: &AbilCtx) -> AECtx {
    ctx.iter()
        .map(|(x, (t, a))| (x, (encode_type_a(t), Qual::uniform(*a))))
        .collect()
}

/// Rewrite every parameter annotation with `f`. Annotations `f` cannot
/// interpret are left in place for the target checker to reject.
fn rewrite_annots(t: &Term, f: &impl Fn(&Annot) -> Option<Annot>) -> Term {
    let go = |s: &Term| rewrite_annots(s, f);
    match t {
        Term::Cst(_) | Term::Var(_) | Term::Hole => t.clone(),
        Term::Abs { param, annot, body } => Term::Abs {
            param: param.clone(),
            annot: annot.as_ref().map(|a| f(a).unwrap_or_else(|| a.clone())),
            body: Box::new(go(body)),
        },
        Term::App(a, b) => Term::app(go(a), go(b)),
        Term::Ref(a) => Term::reference(go(a)),
        Term::Get(a) => Term::get(go(a)),
        Term::Put(a, b) => Term::put(go(a), go(b)),
        Term::Bin(op, a, b) => Term::bin(*op, go(a), go(b)),
    }
}

pub fn encode_term_e(t: &Term) -> Term {
    rewrite_annots(t, &|a| {
        EffType::from_annot(a)
            .ok()
            .map(|ty| encode_type_e(&ty).to_annot(Qual::TOP))
    })
}

pub fn encode_term_a(t: &Term) -> Term {
    rewrite_annots(t, &|a| {
        AbilType::from_annot(a)
            .ok()
            .map(|(ty, ab)| encode_type_a(&ty).to_annot(Qual::uniform(ab)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodingReport {
    pub source_system: System,
    pub term: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_judgment: Option<String>,
    /// The judgment the translation must satisfy, up to subsumption.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_judgment: Option<String>,
    /// The least judgment the combined checker derives for the translation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthesized: Option<String>,
    /// Absent when the source term is ill-typed.
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn report(
    system: System,
    t: &Term,
    source: Result<String, String>,
    target: impl FnOnce() -> (AECtx, Term, AEType, Qual, Mark),
) -> EncodingReport {
    let mut r = EncodingReport {
        source_system: system,
        term: t.to_string(),
        source_judgment: None,
        target_judgment: None,
        synthesized: None,
        holds: None,
        error: None,
    };
    match source {
        Err(e) => r.error = Some(format!("source term is ill-typed: {e}")),
        Ok(j) => {
            r.source_judgment = Some(j);
            let (ctx, encoded, ty, q, e) = target();
            r.target_judgment = Some(ae::print_judgment(&ty, q, e));
            match typecheck_ae(&ctx, &encoded) {
                Ok((sty, sq, se)) => {
                    r.synthesized = Some(ae::print_judgment(&sty, sq, se));
                    r.holds = Some(check_against(&ctx, &encoded, &ty, q, e).unwrap_or(false));
                }
                Err(err) => {
                    r.holds = Some(false);
                    r.error = Some(format!("translation is ill-typed: {err}"));
                }
            }
        }
    }
    r
}

/// Check that the translation of an effect-system judgment `T e` holds as
/// `[[T]] <top,top> e`.
pub fn check_encoding_e(ctx: &EffCtx, t: &Term) -> EncodingReport {
    let source = typecheck_e(ctx, t);
    let shown = source
        .as_ref()
        .map(|(ty, e)| effect::print_judgment(ty, *e))
        .map_err(|e| e.to_string());
    report(System::Effect, t, shown, || {
        let (ty, e) = source.expect("source judgment");
        (encode_env_e(ctx), encode_term_e(t), encode_type_e(&ty), Qual::TOP, e)
    })
}

/// Check that the translation of an ability-system judgment `T a` holds as
/// `[[T]] <a,a> top`.
pub fn check_encoding_a(ctx: &AbilCtx, t: &Term) -> EncodingReport {
    let source = typecheck_a(ctx, t);
    let shown = source
        .as_ref()
        .map(|(ty, a)| format!("{ty} ; {a}"))
        .map_err(|e| e.to_string());
    report(System::Ability, t, shown, || {
        let (ty, a) = source.expect("source judgment");
        (
            encode_env_a(ctx),
            encode_term_a(t),
            encode_type_a(&ty),
            Qual::uniform(a),
            Mark::Top,
        )
    })
}
