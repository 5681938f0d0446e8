//! Experiment runner for the `nnichain` library: TOML-configured sweeps,
//! decay fits, matrix export and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod export;
pub mod fit;
pub mod report;
pub mod sweeps;

use thiserror::Error;

pub use config::{ExperimentConfig, SweepKind, OUTPUT_DIR_ENV};
pub use fit::{fit_decay, DecayFit};

/// Failures surfaced by the binary, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver cap exceeded: {0}")]
    Cap(String),
    #[error("acceptance failed: {}", .0.join(", "))]
    Acceptance(Vec<String>),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Acceptance(_) => 1,
            CliError::Config(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<nnichain::Error> for CliError {
    fn from(e: nnichain::Error) -> Self {
        match e {
            nnichain::Error::Resource(msg) => CliError::Cap(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv error: {e}"))
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match workers {
        None => f(),
        Some(0) => Err(CliError::Config("--workers: must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(f),
    }
}
