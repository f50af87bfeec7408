//! Scenarios, experiments, file formats and offline checks.

pub mod check;
pub mod expectation;
pub mod experiments;
pub mod io;
pub mod scenario;
pub mod scenarios;

use thiserror::Error;

use crate::deduction::DeductionError;
use crate::inductor::InductorError;
use crate::logic::LogicError;
use crate::trading::{ExploitError, TradingError};

pub use expectation::{expectation, DeferralFunction, Variable};
pub use experiments::{
    coherence_probe, convergence_report, evaluate_experiment, format_report, run_experiment, ExperimentReport,
    EXPERIMENTS,
};
pub use scenario::{load_scenario, parse_scenario, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("I/O error: {0}")]
    Stream(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Inductor(#[from] InductorError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    Trading(#[from] TradingError),
    #[error(transparent)]
    Exploit(#[from] ExploitError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

impl HarnessError {
    /// Process exit status: 2 for anything the user must fix in inputs,
    /// 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Inductor(InductorError::ResolutionFailure { .. } | InductorError::Inconsistent { .. }) => 1,
            _ => 2,
        }
    }
}
