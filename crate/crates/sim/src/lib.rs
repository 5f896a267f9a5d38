//! Monte Carlo harness, file formats and CLI glue for the estimators in
//! `partibandits-core`.
//!
//! The harness replays each `(algorithm, budget)` cell over `R` seeded
//! replications, measures per-replication error against the scenario's true
//! mean, and aggregates a high-percentile error summary into a CSV table.
//! Replication streams derive from `(master seed, replication index)`, so
//! results are byte-identical at any parallelism degree.

pub mod config;
pub mod csv_pool;
pub mod harness;
pub mod plot;
pub mod presets;

pub use harness::{
    percentile, run_experiment, Algorithm, AlgorithmSpec, ErrorMetric, ExperimentConfig,
    ResultRow, ResultTable, Scenario, SchemeSpec,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}:{row}: {message}")]
    CsvParse {
        path: String,
        row: u64,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] partibandits_core::Error),
    #[error(
        "replication failed at algorithm `{algorithm}`, budget {budget}, replication \
         {replication}, seed {seed}: {source}"
    )]
    Replication {
        algorithm: String,
        budget: usize,
        replication: usize,
        seed: u64,
        source: partibandits_core::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        SimError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
