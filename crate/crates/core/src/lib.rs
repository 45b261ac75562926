//! Three binary effect-typing disciplines over a Boolean lambda calculus with
//! references, a fuel-bounded evaluator, and a brute-force observational
//! purity oracle.

pub mod ability;
pub mod ae;
pub mod corpus;
pub mod ctx;
pub mod effect;
pub mod encode;
pub mod eval;
pub mod gen;
pub mod oracle;
pub mod report;
pub mod script;
pub mod suite;
pub mod syntax;
pub mod system;
