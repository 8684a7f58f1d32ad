//! Command-line driver for `ncm-core`.
//!
//! A run is described by a TOML [`config::RunConfig`]. The three commands
//! are [`commands::solve`], [`commands::check`] and [`commands::bench`];
//! each returns an [`Outcome`] that maps to a process exit code.

pub mod commands;
pub mod config;
pub mod input;
pub mod problem;
pub mod trace;

use std::path::PathBuf;

use ncm_core::solver::SolveStatus;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] ncm_core::Error),
    #[error("trace: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solved(SolveStatus),
    CheckPassed,
    CheckFailed,
    BenchDone,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Solved(SolveStatus::SecondOrderCritical | SolveStatus::FirstOrderCritical) => 0,
            Outcome::Solved(SolveStatus::MaxIterations) => 2,
            Outcome::Solved(SolveStatus::LineSearchFailure) => 3,
            Outcome::CheckPassed | Outcome::BenchDone => 0,
            Outcome::CheckFailed => 4,
        }
    }
}

/// Exit code for any [`CliError`].
pub const ERROR_EXIT: i32 = 1;

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::SecondOrderCritical => "second-order-critical",
        SolveStatus::FirstOrderCritical => "first-order-critical",
        SolveStatus::MaxIterations => "max-iterations",
        SolveStatus::LineSearchFailure => "line-search-failure",
    }
}
