//! Experiment orchestration: the sampling-and-statistics pipelines and the
//! multi-arm optimization comparison with its on-disk report tree.

mod experiment;
mod output;
mod plan;
mod rq;

pub use experiment::{run_experiment, ArmFailure, ArmOutcome, ArmRuns, ArmSummary, ExperimentOutcome};
pub use output::{emit_reports, render_reports, Manifest, ManifestEntry};
pub use plan::{ArmSpec, ExperimentPlan, ObjectiveKind, ObjectiveSpec, SpaceSource};
pub use rq::{run_rq1, run_rq2, OffsetTransport};

use crate::llm::LlmError;
use crate::stats::StatsError;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunnerError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("{batch} has {got} parsed configs; at least 2 are needed")]
    InsufficientSamples { batch: String, got: usize },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {message}")]
    IoFailure { path: String, message: String },
}

impl RunnerError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> RunnerError {
        RunnerError::IoFailure {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RunnerError::InvalidPlan(_) => "InvalidPlan",
            RunnerError::InsufficientSamples { .. } => "InsufficientSamples",
            RunnerError::Llm(e) => e.code(),
            RunnerError::Stats(e) => e.code(),
            RunnerError::IoFailure { .. } => "IoFailure",
        }
    }

    /// Whether the failure lies in the caller's input rather than at runtime.
    pub fn is_validation(&self) -> bool {
        match self {
            RunnerError::InvalidPlan(_) => true,
            RunnerError::Llm(e) => e.is_fatal(),
            _ => false,
        }
    }
}

/// Median with the two middle values averaged for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
