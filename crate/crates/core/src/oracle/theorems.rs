//! Executable forms of the safety, reordering and beta-equivalence theorems.
//! Each check establishes the theorem's premises with a type checker and
//! then asks the oracle whether the conclusion holds semantically.

use serde::Serialize;

use super::env::EnvSpec;
use super::equiv::{obs_purity, op_equiv, Disagreement, Equivalence, PurityOptions, PurityVerdict};
use crate::ability::is_pure_a;
use crate::ae::typecheck_ae;
use crate::effect::is_pure_e;
use crate::syntax::{desugar_let, subst, BinOp, Term};
use crate::system::System;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SafetyCase {
    pub term: String,
    /// Absent when the term does not type check.
    pub system_pure: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PurityVerdict>,
    pub violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SafetyReport {
    pub system: System,
    pub cases: Vec<SafetyCase>,
    pub violations: usize,
}

/// Effect safety for one term: if the system calls it pure, the oracle must
/// not find it impure. Terms the system rejects or calls impure are not
/// sent to the oracle.
pub fn safety_case(system: System, env: &EnvSpec, t: &Term, opts: &PurityOptions) -> SafetyCase {
    let mut case = SafetyCase {
        term: t.to_string(),
        system_pure: None,
        verdict: None,
        violation: false,
        error: None,
    };
    match system.is_pure(env, t) {
        Err(e) => case.error = Some(e.to_string()),
        Ok(pure) => {
            case.system_pure = Some(pure);
            if pure {
                match obs_purity(t, env, opts) {
                    Ok(v) => {
                        case.violation = !v.is_pure();
                        case.verdict = Some(v);
                    }
                    Err(e) => case.error = Some(format!("oracle: {e}")),
                }
            }
        }
    }
    case
}

pub fn check_effect_safety(
    system: System,
    env: &EnvSpec,
    corpus: &[Term],
    opts: &PurityOptions,
) -> SafetyReport {
    let cases: Vec<SafetyCase> = corpus
        .iter()
        .map(|t| safety_case(system, env, t, opts))
        .collect();
    let violations = cases.iter().filter(|c| c.violation).count();
    SafetyReport {
        system,
        cases,
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "result")]
pub enum TheoremCheck {
    Holds,
    Fails(Disagreement),
    /// Both sides ran out of fuel somewhere, with no disagreement.
    Inconclusive,
    Precondition { reason: String },
}

impl TheoremCheck {
    fn from_equiv(e: Equivalence) -> TheoremCheck {
        match e {
            Equivalence::Equiv => TheoremCheck::Holds,
            Equivalence::Distinguished(d) => TheoremCheck::Fails(d),
            Equivalence::Inconclusive => TheoremCheck::Inconclusive,
        }
    }

    fn precondition(reason: impl Into<String>) -> TheoremCheck {
        TheoremCheck::Precondition {
            reason: reason.into(),
        }
    }
}

/// Whether `t1 op t2` and `t2 op t1` may be swapped according to `system`.
pub fn reordering_precondition(
    system: System,
    env: &EnvSpec,
    t1: &Term,
    t2: &Term,
    op: BinOp,
) -> Result<(), String> {
    let composite = Term::bin(op, t1.clone(), t2.clone());
    match system {
        System::Effect => match is_pure_e(&env.effect_ctx(), &composite) {
            Ok(true) => Ok(()),
            Ok(false) => Err("composite is not pure".into()),
            Err(e) => Err(e.to_string()),
        },
        System::Ability => match is_pure_a(&env.ability_ctx(), &composite) {
            Ok(true) => Ok(()),
            Ok(false) => Err("composite is not pure".into()),
            Err(e) => Err(e.to_string()),
        },
        System::Ae => {
            let ctx = env.ae_ctx();
            typecheck_ae(&ctx, &composite).map_err(|e| e.to_string())?;
            let (_, _, e1) = typecheck_ae(&ctx, t1).map_err(|e| e.to_string())?;
            let (_, _, e2) = typecheck_ae(&ctx, t2).map_err(|e| e.to_string())?;
            if e1.is_top() && e2.is_top() {
                Err("both operands have effect top".into())
            } else {
                Ok(())
            }
        }
    }
}

pub fn check_reordering(
    t1: &Term,
    t2: &Term,
    op: BinOp,
    system: System,
    env: &EnvSpec,
    fuel: u64,
    store_bound: u64,
) -> TheoremCheck {
    if let Err(reason) = reordering_precondition(system, env, t1, t2, op) {
        return TheoremCheck::precondition(reason);
    }
    let lhs = Term::bin(op, t1.clone(), t2.clone());
    let rhs = Term::bin(op, t2.clone(), t1.clone());
    TheoremCheck::from_equiv(op_equiv(&lhs, &rhs, env, fuel, store_bound))
}

/// Premises of beta equivalence: the application type checks and the
/// argument has no effect and no fresh ability.
pub fn beta_precondition(x: &str, t2: &Term, t1: &Term, env: &EnvSpec) -> Result<(), String> {
    let ctx = env.ae_ctx();
    let (_, q, e) = typecheck_ae(&ctx, t1).map_err(|e| e.to_string())?;
    typecheck_ae(&ctx, &desugar_let(x, t1.clone(), t2.clone())).map_err(|e| e.to_string())?;
    if e.is_top() {
        return Err("argument has effect top".into());
    }
    if q.fresh.is_top() {
        return Err("argument may return a fresh location".into());
    }
    Ok(())
}

/// Compare `(fun x => t2) t1` with `t2[t1/x]`.
pub fn check_beta(x: &str, t2: &Term, t1: &Term, env: &EnvSpec, fuel: u64, store_bound: u64) -> TheoremCheck {
    if let Err(reason) = beta_precondition(x, t2, t1, env) {
        return TheoremCheck::precondition(reason);
    }
    let app = desugar_let(x, t1.clone(), t2.clone());
    let substituted = subst(t2, x, t1);
    TheoremCheck::from_equiv(op_equiv(&app, &substituted, env, fuel, store_bound))
}
