//! Solvers for adaptive query games with integer feedback.
//!
//! Strategies are resumable state machines ([`strategy::Strategy`]) so that
//! several live sub-strategies can be interleaved query by query. The two
//! engines turn a game that splits in half cheaply into a solver whose length
//! is linear in the split cost; the application modules instantiate them for
//! coin weighing, Mastermind and sparse set query.

pub mod coins;
pub mod engine;
pub mod error;
pub mod game;
pub mod games;
pub mod mastermind;
pub mod schedule;
pub mod setquery;
pub mod strategy;
pub mod verify;

pub use error::{Result, SolveError};
pub use game::{
    info_lower_bound, merge_queries, run_counted, run_strategy, Oracle, Pattern, RunStats,
    SumQuery, Subset, Transcript,
};
pub use strategy::{Ask, BoxStrategy, Residue, Step, Strategy};
