//! Ambient environments: which names a term may mention, and how to build
//! the equivalent pre-states the oracle evaluates in.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::simple::{SType, SimpleCtx};
use crate::ability::{AbilCtx, AbilType};
use crate::ae::{AECtx, AEType, Qual};
use crate::effect::{EffCtx, EffType};
use crate::eval::{Env, Store, Value};
use crate::syntax::Mark;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BindingKind {
    BoolVal,
    RefCell,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvBinding {
    pub name: String,
    pub kind: BindingKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub bindings: Vec<EnvBinding>,
}

#[derive(Debug, Error)]
pub enum EnvSpecError {
    #[error("invalid environment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("`{0}` is bound twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
}

fn valid_name(x: &str) -> bool {
    let mut chars = x.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl EnvSpec {
    pub fn new(bindings: impl IntoIterator<Item = (&'static str, BindingKind)>) -> Self {
        EnvSpec {
            bindings: bindings
                .into_iter()
                .map(|(name, kind)| EnvBinding {
                    name: name.to_string(),
                    kind,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EnvSpecError> {
        let spec: EnvSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EnvSpecError> {
        let mut seen = BTreeSet::new();
        for b in &self.bindings {
            if !valid_name(&b.name) {
                return Err(EnvSpecError::BadName(b.name.clone()));
            }
            if !seen.insert(b.name.as_str()) {
                return Err(EnvSpecError::Duplicate(b.name.clone()));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|b| b.name.as_str())
    }

    /// Number of distinct pre-states: every binding holds one Boolean.
    pub fn config_count(&self) -> u64 {
        1u64 << self.bindings.len().min(63)
    }

    /// Pre-state number `config`: bit `i` is the Boolean held by binding `i`.
    /// Reference cells are allocated in binding order.
    pub fn instantiate(&self, config: u64) -> (Env<'_>, Store<'static>) {
        let mut env = Env::empty();
        let mut store = Vec::new();
        for (i, b) in self.bindings.iter().enumerate() {
            let bit = (config >> i) & 1 == 1;
            let v = match b.kind {
                BindingKind::BoolVal => Value::Bool(bit),
                BindingKind::RefCell => {
                    store.push(Value::Bool(bit));
                    Value::Loc(store.len() - 1)
                }
            };
            env = env.bind(&b.name, v);
        }
        (env, store)
    }

    fn typed<T>(&self, bool_ty: T, ref_ty: T) -> Vec<(String, T)>
    where
        T: Clone,
    {
        self.bindings
            .iter()
            .map(|b| {
                let ty = match b.kind {
                    BindingKind::BoolVal => bool_ty.clone(),
                    BindingKind::RefCell => ref_ty.clone(),
                };
                (b.name.clone(), ty)
            })
            .collect()
    }

    pub fn simple_ctx(&self) -> SimpleCtx {
        self.typed(SType::Bool, SType::Ref).into_iter().collect()
    }

    pub fn effect_ctx(&self) -> EffCtx {
        self.typed(EffType::Bool, EffType::Ref).into_iter().collect()
    }

    /// Cells are resources; Booleans are not.
    pub fn ability_ctx(&self) -> AbilCtx {
        self.typed((AbilType::Bool, Mark::Bot), (AbilType::Ref, Mark::Top))
            .into_iter()
            .collect()
    }

    /// Cells get the default reference qualifier `<top,bot>`.
    pub fn ae_ctx(&self) -> AECtx {
        self.typed(
            (AEType::Bool, Qual::BOT),
            (AEType::Ref, Qual::new(Mark::Top, Mark::Bot)),
        )
        .into_iter()
        .collect()
    }
}
