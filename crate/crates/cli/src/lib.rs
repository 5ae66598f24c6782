//! Config-driven experiment runner for the `ymh-core` toolkit.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{parse_pairs, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run, RunError};

/// Environment variable selecting the worker thread count.
pub const THREADS_ENV: &str = "YMH_THREADS";
