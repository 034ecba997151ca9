//! Experiment harness: configs, run orchestration, reports and the CLI.
//!
//! Exit-code contract of the binary: 0 success, 2 usage or malformed
//! config, 3 numerical blowup, 4 insufficient data for a decay fit.

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::solver::SolverError;

pub mod cli;
pub mod config;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical blowup at t = {t}")]
    Blowup { t: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => 2,
            HarnessError::Blowup { .. } => 3,
            HarnessError::InsufficientData(_) => 4,
            HarnessError::Io { .. } | HarnessError::Internal(_) => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Blowup { t } => HarnessError::Blowup { t },
            SolverError::Config(msg) => HarnessError::Config(msg),
            other => HarnessError::Internal(other.to_string()),
        }
    }
}

impl From<AnalysisError> for HarnessError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::TooFewSamples { .. } | AnalysisError::NonPositiveValue { .. } => {
                HarnessError::InsufficientData(e.to_string())
            }
            other => HarnessError::Internal(other.to_string()),
        }
    }
}
