//! Uniform access to the three checkers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ability::{self, is_pure_a, judge_a};
use crate::ae::{self, is_pure_ae, typecheck_ae};
use crate::ctx::TypeError;
use crate::effect::{self, is_pure_e, typecheck_e};
use crate::oracle::EnvSpec;
use crate::syntax::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Effect,
    Ability,
    Ae,
}

impl System {
    pub const ALL: [System; 3] = [System::Effect, System::Ability, System::Ae];

    pub fn name(self) -> &'static str {
        match self {
            System::Effect => "effect",
            System::Ability => "ability",
            System::Ae => "ae",
        }
    }

    pub fn is_pure(self, env: &EnvSpec, t: &Term) -> Result<bool, TypeError> {
        match self {
            System::Effect => is_pure_e(&env.effect_ctx(), t),
            System::Ability => is_pure_a(&env.ability_ctx(), t),
            System::Ae => is_pure_ae(&env.ae_ctx(), t),
        }
    }

    /// The synthesized judgment, printed in the system's concrete syntax.
    pub fn judgment(self, env: &EnvSpec, t: &Term) -> Result<String, TypeError> {
        Ok(match self {
            System::Effect => {
                let (ty, e) = typecheck_e(&env.effect_ctx(), t)?;
                effect::print_judgment(&ty, e)
            }
            System::Ability => {
                let (ty, a, amb) = judge_a(&env.ability_ctx(), t)?;
                ability::print_judgment(&ty, a, amb)
            }
            System::Ae => {
                let (ty, q, e) = typecheck_ae(&env.ae_ctx(), t)?;
                ae::print_judgment(&ty, q, e)
            }
        })
    }

    pub fn typechecks(self, env: &EnvSpec, t: &Term) -> bool {
        self.judgment(env, t).is_ok()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "effect" => Ok(System::Effect),
            "ability" => Ok(System::Ability),
            "ae" => Ok(System::Ae),
            other => Err(format!("unknown system `{other}` (expected effect, ability or ae)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::BindingKind;
    use crate::syntax::parse;

    #[test]
    fn incomparability_witnesses() {
        let masking = parse("let x = ref true in !x").unwrap();
        let empty = EnvSpec::default();
        let verdicts: Vec<bool> = System::ALL
            .iter()
            .map(|s| s.is_pure(&empty, &masking).unwrap())
            .collect();
        assert_eq!(verdicts, [false, true, true]);

        let mention = parse("(fun (x: Bool) => a) true").unwrap();
        let env = EnvSpec::new([("a", BindingKind::RefCell)]);
        let verdicts: Vec<bool> = System::ALL
            .iter()
            .map(|s| s.is_pure(&env, &mention).unwrap())
            .collect();
        assert_eq!(verdicts, [true, false, true]);
    }

    #[test]
    fn names_round_trip() {
        for s in System::ALL {
            assert_eq!(s.name().parse::<System>().unwrap(), s);
        }
        assert!("lambda".parse::<System>().is_err());
    }
}
