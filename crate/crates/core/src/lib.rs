//! Search for regular partial difference sets (PDSs) in finite groups by
//! hill climbing, with independent certification of every hit.
//!
//! - [`group`]: multiplication tables, built-in families, the table format.
//! - [`pds`]: parameters, the `D^2` coefficient state and O(k) swap deltas.
//! - [`search`]: trials, the convergence rule, parallel harness, schedules.
//! - [`verify`]: brute-force PDS and strongly-regular-graph checks.
//! - [`params`]: feasibility screening of `(n, k, lambda, mu)`.
//! - [`record`] and [`cli`]: JSON output and the command line.

pub mod cli;
pub mod group;
pub mod params;
pub mod pds;
pub mod record;
pub mod search;
pub mod verify;

pub use group::{parse_table, validate_table, GroupTable};
pub use pds::{Params, SearchState};
pub use search::{run_search, run_trial, SearchConfig, TrialResult};
pub use verify::{certify, verify_pds, Certificate};
