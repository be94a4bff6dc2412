//! Experiment runner for random compositions of circle maps: JSON configs,
//! parallel sampling with deterministic aggregation, JSONL/CSV output and the
//! acceptance suite.

pub mod config;
pub mod oracle;
pub mod output;
pub mod run;
pub mod suite;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const FAILED: i32 = 3;
}
