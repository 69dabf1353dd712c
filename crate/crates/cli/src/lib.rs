//! Experiment runner: JSON configuration, deterministic seeded orchestration
//! of the core library, structured JSON reports and CSV sweeps.

pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("infeasible dimensions: ensemble needs {needed_gib:.2} GiB, cap is {cap_gib:.2} GiB")]
    MemoryCap { needed_gib: f64, cap_gib: f64 },

    #[error("computation failed: {0}")]
    Core(#[from] qlock_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("non-finite value in results: {0}")]
    NonFinite(String),

    #[error("sweep error: {0}")]
    Sweep(String),
}

impl CliError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::MemoryCap { .. } => "memory_cap",
            CliError::Core(_) => "computation_failed",
            CliError::Io(_) => "io_error",
            CliError::Json(_) => "serialization_error",
            CliError::NonFinite(_) => "non_finite_result",
            CliError::Sweep(_) => "sweep_error",
        }
    }

    /// JSON error object written to stderr on failure.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
