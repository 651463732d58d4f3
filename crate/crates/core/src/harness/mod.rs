//! Experiment configuration, seeded Monte Carlo execution, and CSV output.
//!
//! A config names an instance (explicit arms or a generator seed), a policy
//! list, a budget grid, a run count, and a base seed. Execution derives one
//! seed per (policy, budget, run) cell, plays the runs (in parallel when the
//! `parallel` feature is on), and emits rows sorted by (policy, budget, run)
//! so the bytes written are independent of scheduling.

mod config;
mod report;
mod run;

pub use config::{
    ExperimentConfig, GeneratorSpec, InstanceSpec, PolicySpec, ResolvedExperiment, ResolvedPolicy,
};
pub use report::{
    aggregate, read_rows_csv, rows_to_csv_string, write_aggregate_csv, write_rows_csv,
    AggregateRow,
};
pub use run::{derive_seed, run_experiment, run_experiment_sequential, ExperimentOutput, ResultRow, RowError};

use thiserror::Error;

use crate::eval::EvalError;
use crate::policy::PolicyError;
use crate::CoreError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed results csv: {0}")]
    MalformedCsv(String),
    #[error("nothing to aggregate")]
    EmptyAggregation,
    #[cfg(feature = "parallel")]
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
