//! Table-constraint CSP solving.
//!
//! Backtrack search with d-way branching and the conflict-directed dom/wdeg
//! variable ordering, with a choice of lookahead: generalized arc consistency
//! (simple tabular reduction), partition-one arc consistency (singleton
//! tests), or relational neighborhood inverse consistency on the dual graph.
//! Wipeouts surface as typed events so that different constraint-weight
//! update strategies can consume them. A brute-force oracle suite backs the
//! tests.
//!
//! The crate is `no_std` (alloc only); IO, clocks, and file formats live in
//! the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod events;
pub mod format;
pub mod gac;
pub mod generate;
pub mod model;
pub mod oracle;
pub mod poac;
pub mod rnic;
pub mod search;
pub mod state;
pub mod weighting;

pub use events::{EventSink, NullSink, PropagationEvent};
pub use format::{parse_instance, serialize_instance, ParseError};
pub use gac::{enforce_gac, revise_str, GacOutcome};
pub use generate::{generate_random, GenError, SplitMix64};
pub use model::{is_solution, Assignment, ConId, Csp, ModelError, Value, VarId};
pub use oracle::{
    brute_force_solve, closure_oracle, closure_oracle_shuffled, OracleClosure, OracleError,
    OracleProperty,
};
pub use poac::{enforce_poac, singleton_test, PoacCounters, PoacOutcome, SingletonOutcome};
pub use rnic::{build_dual_graph, enforce_rnic, tuple_has_support, DualGraph, RnicOutcome};
pub use search::{
    config_id, solve, solve_recording, ConfigError, FrozenClock, SolveConfig, SolveResult,
    SolveStatus, SteppingClock, TimeSource, WipeoutCounts,
};
pub use state::{Marker, SearchState, StateSnapshot};
pub use weighting::{
    alpha_wdeg, alpha_wdeg_var, apply_event, select_variable, Consistency, Strategy, WeightKey,
    WeightStore,
};
