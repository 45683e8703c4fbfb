//! Config-driven experiments on the synthetic environment.

mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_compare, cmd_run, cmd_sweep, CompareOptions, ComparisonSummary, RunOptions, SamplerSummary, SweepCell,
    SweepOptions,
};
pub use config::{CompareSettings, ExperimentConfig, SEED_ENV_VAR};
