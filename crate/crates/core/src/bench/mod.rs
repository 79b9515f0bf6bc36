//! Experiment harness behind the `accel-kit` command line: JSON run
//! configurations, method sweeps, CSV traces and summaries.

mod config;
mod csv;
mod run;
mod sweep;

pub use config::{ExperimentConfig, InitialGuess, MethodSpec, SweepConfig};
pub use csv::{format_float, CsvTrace, CSV_HEADER};
pub use run::{
    compare_methods, run_experiment, single_method, thread_count, ExperimentOutput, Ranking,
    RunSummary, THREADS_ENV,
};
pub use sweep::{folded_angle, rfactor_sweep, SweepOutput, SweepRow};

use crate::accel::AccelError;
use crate::krylov::KrylovError;
use crate::problems::ProblemError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] AccelError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
}

impl BenchError {
    /// Process exit code: 2 for configuration problems, 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Io(_) | BenchError::Problem(ProblemError::Io(_)) => 3,
            _ => 2,
        }
    }
}
