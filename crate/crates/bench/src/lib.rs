//! Seeded experiment sweeps over the `ipas` solvers.
//!
//! [`run_experiment`] expands an [`ExperimentConfig`] into its grid, runs
//! every grid point for every seed on a worker pool, and leaves one trace CSV
//! per run next to a `runs.csv` manifest, a `summary.csv` with cross-seed
//! statistics and a `curves.csv` with mean `log10 ‖d‖` against budget.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod summary;

pub use config::{ExperimentConfig, GridPoint, ProblemSpec, Sweep};
pub use experiment::{run_experiment, trace_file_name, ExperimentOutcome, ManifestRow};
pub use summary::{summarize_dir, summarize_runs, CompletedRun, CurvePoint, SummaryRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Solver(#[from] ipas::Error),
    #[error("no completed runs for {0}")]
    EmptyGroup(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn is_config_error(&self) -> bool {
        matches!(self, BenchError::Config(_) | BenchError::Toml(_))
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
