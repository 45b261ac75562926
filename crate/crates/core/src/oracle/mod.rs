//! Semantic ground truth: operational equivalence, observational purity,
//! and the empirical theorem checks built on them.

pub mod contexts;
pub mod env;
pub mod equiv;
pub mod simple;
pub mod theorems;

pub use contexts::{enumerate_contexts, ContextEnumerator};
pub use env::{BindingKind, EnvBinding, EnvSpec, EnvSpecError};
pub use equiv::{
    obs_purity, op_equiv, purity_pair, Bounds, Disagreement, Equivalence, Obs, PurityOptions,
    PurityStatus, PurityVerdict, Witness, DEFAULT_FUEL, DEFAULT_MAX_NODES,
};
pub use simple::{simple_type, SType, SimpleCtx};
pub use theorems::{
    beta_precondition, check_beta, check_effect_safety, check_reordering, reordering_precondition,
    safety_case, SafetyCase, SafetyReport, TheoremCheck,
};
