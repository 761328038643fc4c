//! A logic-programming engine built around reified equality.
//!
//! The core pieces: a term representation ([`term`]), a bindings store
//! with trail and suspended disequations ([`state`], [`dif`]), a clause
//! database with first-argument indexing ([`db`]), an operator
//! precedence parser ([`parser`]), the solver ([`machine`]) and a goal
//! expansion pass ([`reif`]). A small relation library ([`stdlib`]) is
//! preloaded by the CLI.

pub mod bench;
pub mod cli;
pub mod db;
pub mod dif;
pub mod fmt;
pub mod goal;
pub mod machine;
pub mod parser;
pub mod reif;
pub mod state;
pub mod stdlib;
pub mod term;

pub use db::Database;
pub use machine::{run_query, run_query_with, Answer, EngineError, Machine, QueryOutcome};
pub use state::{SolveStats, State};
pub use stdlib::stdlib;
pub use term::{Term, VarId};
