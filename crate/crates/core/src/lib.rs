//! Mining a precise finite-state-machine test oracle out of an imprecise
//! (nondeterministic) one.
//!
//! An imprecise oracle is an FSM with several transitions on the same
//! (state, input) pair. Each complete deterministic submachine is a
//! candidate. Tests are run against the implementation, a human expert
//! picks the intended response among the plausible ones, and the machine is
//! reduced until one candidate (up to equivalence) is left.

pub mod distinguish;
pub mod encoding;
pub mod error;
pub mod exec;
pub mod format;
pub mod fsm;
pub mod harness;
pub mod json;
pub mod mining;

pub use error::{Error, Result};
pub use fsm::{
    Fsm, InputSymbol, OutputSymbol, Response, StateId, Test, TransitionDef, TransitionId,
};
