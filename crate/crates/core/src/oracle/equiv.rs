//! Operational equivalence over enumerated pre-states, and observational
//! purity over enumerated contexts.

use std::fmt;

use serde::{Serialize, Serializer};

use super::contexts::ContextEnumerator;
use super::env::EnvSpec;
use super::simple::{simple_type, SType};
use crate::ctx::TypeError;
use crate::eval::{eval, EvalError, Outcome, Value};
use crate::syntax::{desugar_let, plug, print, Term, RESERVED_VAR};

pub const DEFAULT_MAX_NODES: usize = 5;
pub const DEFAULT_FUEL: u64 = 10_000;

/// What a program context can see of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obs {
    Bool(bool),
    Location,
    Closure,
    Timeout,
    Error(EvalError),
}

impl Obs {
    pub fn of(outcome: &Outcome<'_>) -> Obs {
        match outcome {
            Outcome::Done { value, .. } => match value {
                Value::Bool(b) => Obs::Bool(*b),
                Value::Loc(_) => Obs::Location,
                Value::Clos(_) => Obs::Closure,
            },
            Outcome::Timeout => Obs::Timeout,
            Outcome::Err(e) => Obs::Error(*e),
        }
    }

    /// Whether a context can tell the two runs apart. Only Booleans are
    /// compared by value; any two locations or closures agree.
    pub fn distinguishes(self, other: Obs) -> bool {
        use Obs::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a != b,
            (Location, Location) | (Closure, Closure) | (Timeout, Timeout) => false,
            (Error(a), Error(b)) => a != b,
            _ => true,
        }
    }
}

impl fmt::Display for Obs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obs::Bool(b) => write!(f, "{b}"),
            Obs::Location => f.write_str("location"),
            Obs::Closure => f.write_str("closure"),
            Obs::Timeout => f.write_str("timeout"),
            Obs::Error(e) => write!(f, "error({})", e.code()),
        }
    }
}

impl Serialize for Obs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Disagreement {
    /// Pre-state number, see [`EnvSpec::instantiate`].
    pub store_config: u64,
    pub left: Obs,
    pub right: Obs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "verdict")]
pub enum Equivalence {
    Equiv,
    Distinguished(Disagreement),
    /// No disagreement, but some run hit the fuel bound on both sides.
    Inconclusive,
}

/// Number of pre-states examined for `env` under `store_bound`.
pub fn store_configs(env: &EnvSpec, store_bound: u64) -> u64 {
    env.config_count().min(store_bound.max(1))
}

pub fn op_equiv(t1: &Term, t2: &Term, env: &EnvSpec, fuel: u64, store_bound: u64) -> Equivalence {
    let mut timed_out = false;
    for config in 0..store_configs(env, store_bound) {
        let (henv, store) = env.instantiate(config);
        let left = Obs::of(&eval(&henv, store.clone(), t1, fuel));
        let right = Obs::of(&eval(&henv, store, t2, fuel));
        if left.distinguishes(right) {
            return Equivalence::Distinguished(Disagreement {
                store_config: config,
                left,
                right,
            });
        }
        timed_out |= left == Obs::Timeout;
    }
    if timed_out {
        Equivalence::Inconclusive
    } else {
        Equivalence::Equiv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PurityStatus {
    PureUpToBounds,
    Impure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub context: String,
    pub left: Obs,
    pub right: Obs,
    pub store_config: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Bounds {
    pub context_size: usize,
    pub fuel: u64,
    pub store_configs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PurityVerdict {
    pub status: PurityStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub bounds: Bounds,
    pub contexts_checked: usize,
    /// Contexts where both sides ran out of fuel in some pre-state.
    pub inconclusive: usize,
}

impl PurityVerdict {
    pub fn is_pure(&self) -> bool {
        self.status == PurityStatus::PureUpToBounds
    }
}

#[derive(Clone, Debug)]
pub struct PurityOptions {
    pub max_nodes: usize,
    pub fuel: u64,
    pub store_bound: u64,
    /// Type of the holes. Defaults to the simple type of the term, which is
    /// required when the term has none (self-application, for instance).
    pub hole_type: Option<SType>,
}

impl Default for PurityOptions {
    fn default() -> Self {
        PurityOptions {
            max_nodes: DEFAULT_MAX_NODES,
            fuel: DEFAULT_FUEL,
            store_bound: u64::MAX,
            hole_type: None,
        }
    }
}

/// `let x = t in C[x]` and `C[t]` for context `C`.
pub fn purity_pair(ctx: &Term, t: &Term) -> (Term, Term) {
    let left = desugar_let(RESERVED_VAR, t.clone(), plug(ctx, &Term::var(RESERVED_VAR)));
    (left, plug(ctx, t))
}

/// Search for a context that tells binding `t` once apart from evaluating
/// it in place.
pub fn obs_purity(t: &Term, env: &EnvSpec, opts: &PurityOptions) -> Result<PurityVerdict, TypeError> {
    let hole = match &opts.hole_type {
        Some(ty) => ty.clone(),
        None => simple_type(&env.simple_ctx(), t, None)?,
    };
    let simple_env = env.simple_ctx().iter().map(|(x, ty)| (x.to_string(), ty.clone())).collect();
    let mut contexts = ContextEnumerator::new(hole, simple_env);
    let bounds = Bounds {
        context_size: opts.max_nodes,
        fuel: opts.fuel,
        store_configs: store_configs(env, opts.store_bound),
    };
    let mut checked = 0;
    let mut inconclusive = 0;
    for size in 0..=opts.max_nodes {
        for c in contexts.of_size(size).iter() {
            checked += 1;
            let (left, right) = purity_pair(c, t);
            match op_equiv(&left, &right, env, opts.fuel, opts.store_bound) {
                Equivalence::Equiv => {}
                Equivalence::Inconclusive => inconclusive += 1,
                Equivalence::Distinguished(d) => {
                    return Ok(PurityVerdict {
                        status: PurityStatus::Impure,
                        witness: Some(Witness {
                            context: print(c),
                            left: d.left,
                            right: d.right,
                            store_config: d.store_config,
                        }),
                        bounds,
                        contexts_checked: checked,
                        inconclusive,
                    })
                }
            }
        }
    }
    Ok(PurityVerdict {
        status: PurityStatus::PureUpToBounds,
        witness: None,
        bounds,
        contexts_checked: checked,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::env::BindingKind;
    use crate::syntax::parse;

    fn a_env() -> EnvSpec {
        EnvSpec::new([("a", BindingKind::RefCell)])
    }

    const OMEGA: &str = "(fun (x: Bool) => x x) (fun (x: Bool) => x x)";

    #[test]
    fn op_equiv_examples() {
        let t = Term::Cst(true);
        assert_eq!(op_equiv(&t, &t, &EnvSpec::default(), 10, 1), Equivalence::Equiv);
        let read = parse("!a").unwrap();
        assert_eq!(
            op_equiv(&read, &t, &a_env(), 10, 2),
            Equivalence::Distinguished(Disagreement {
                store_config: 0,
                left: Obs::Bool(false),
                right: Obs::Bool(true)
            })
        );
        let omega = parse(OMEGA).unwrap();
        assert!(matches!(
            op_equiv(&omega, &t, &EnvSpec::default(), 1000, 1),
            Equivalence::Distinguished(Disagreement { left: Obs::Timeout, .. })
        ));
        assert_eq!(op_equiv(&omega, &omega, &EnvSpec::default(), 1000, 1), Equivalence::Inconclusive);
    }

    #[test]
    fn purity_examples() {
        let opts = PurityOptions::default();
        let verdict = |src: &str| obs_purity(&parse(src).unwrap(), &EnvSpec::default(), &opts).unwrap();
        let alloc = verdict("ref true");
        assert_eq!(alloc.status, PurityStatus::Impure);
        assert_eq!(alloc.witness.unwrap().context, "[] := false && ![]");
        assert!(verdict("let x = ref true in !x").is_pure());
        assert!(verdict("true").is_pure());
    }

    #[test]
    fn divergence_is_caught_by_the_discarding_context() {
        let opts = PurityOptions {
            hole_type: Some(SType::Bool),
            ..PurityOptions::default()
        };
        let v = obs_purity(&parse(OMEGA).unwrap(), &EnvSpec::default(), &opts).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.context.as_str(), w.left, w.right), ("true", Obs::Timeout, Obs::Bool(true)));
        assert_eq!(v.inconclusive, 1);
    }

    #[test]
    fn verdict_json_shape() {
        let v = obs_purity(&parse("!a").unwrap(), &a_env(), &PurityOptions::default()).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "impure");
        assert!(json["witness"]["context"].is_string());
        assert_eq!(json["bounds"]["fuel"], 10_000);
        assert_eq!(json["bounds"]["storeConfigs"], 2);
    }
}
