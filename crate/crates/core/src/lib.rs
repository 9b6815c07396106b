//! Reachability analysis for self-modifying pushdown systems.
//!
//! A self-modifying pushdown system (SM-PDS) is a pushdown system whose
//! set of enabled rules, the *phase*, is part of the configuration and can
//! be rewritten by dedicated self-modifying rules. This crate computes the
//! backward (`pre*`) and forward (`post*`) reachability closures of regular
//! sets of configurations, represented as P-automata, by direct saturation.
//! Translation-based baselines, a small self-modifying assembly front end
//! and a benchmark harness are included.

pub mod asm;
pub mod automaton;
pub mod bench;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod poststar;
pub mod prestar;
pub mod saturation;
pub mod translate;

pub use automaton::PAutomaton;
pub use error::{Error, Result};
pub use model::{Configuration, Phase, Rule, RuleId, Smpds, StateId, SymbolId};
