//! Batch runner for the bipartite geometric phase library: configuration
//! files, parameter sweeps, figure presets and the validation suite.

// NaN inputs must fail the `!(x >= 0.0)` style guards used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod validation;

pub use config::{parse, ExperimentConfig};
pub use sweep::{run_sweep, Table, Value};

fn located(path: &str, message: &str) -> String {
    if path.is_empty() || path == "." {
        message.to_string()
    } else {
        format!("at `{path}`: {message}")
    }
}

/// Problems found while reading a configuration.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config {}", located(path, message))]
    Parse { path: String, message: String },
    #[error("invalid config {}", located(path, message))]
    Invalid { path: String, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{0}")]
    Runtime(String),
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
}
