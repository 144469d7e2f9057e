//! Verification toolkit for systems of communicating session automata (CSA)
//! over point-to-point FIFO channels.
//!
//! The crate decides bounded compatibility of a system — channel-bound
//! independence (OBI/IBI and their decidable strengthenings), exhaustivity,
//! safety (eventual reception and progress), the stable property — by
//! exploring bounded transition systems with partial order reduction. It
//! also projects transition systems onto participants and compares them up
//! to weak bisimulation, evaluates trace-level predicates (validity,
//! match-boundedness, exchange decompositions, causal equivalence), and
//! generates a parametric benchmark family.

pub mod bench;
pub mod bisim;
pub mod checks;
pub mod corpus;
pub mod explore;
pub mod format;
pub mod model;
pub mod report;
pub mod traces;

#[cfg(test)]
pub(crate) mod testutil;

pub use model::{
    enabled, successor, Action, Automaton, Bound, Channel, Configuration, Direction, Execution,
    MessageLabel, Participant, StateKind, System, SystemError, Violation, ViolationKind,
};
