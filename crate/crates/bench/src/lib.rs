//! Benchmark harness for the active-particle selection backends.
//!
//! Builds good-case and bad-case Hermite workloads (or a physics-free random
//! one), runs them under each backend, and reports operation counters and
//! timings as CSV rows.

pub mod commands;
pub mod config;
pub mod row;

use thiserror::Error;

pub use commands::{
    build_system, cmd_compare, cmd_generate, cmd_run, cmd_scaling, least_squares_slope, run_once,
    ScalingPoint, ScalingTable,
};
pub use config::{RunConfig, Scenario};
pub use row::{BenchRow, CSV_HEADER};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Hermite(#[from] hitsel::HermiteError),
    #[error(transparent)]
    Scheduler(#[from] hitsel::SchedulerError),
    #[error(transparent)]
    Time(#[from] hitsel::TimeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
