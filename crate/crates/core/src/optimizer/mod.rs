//! Sequential trial loop with a random-search baseline and a small
//! tree-structured Parzen estimator.

mod run;
mod sampler;
mod tpe;

pub use run::run_optimization;
pub use sampler::{random_sample, seeded_rng, OptRng};
pub use tpe::tpe_suggest;

use crate::config::{HyperparameterConfig, SearchSpace};
use crate::objectives::ObjectiveError;
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use thiserror::Error;

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub index: usize,
    pub config: HyperparameterConfig,
    pub loss: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Tpe,
    Random,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Tpe => "tpe",
            Algo::Random => "random",
        })
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tpe" => Ok(Algo::Tpe),
            "random" => Ok(Algo::Random),
            other => Err(format!("unknown algorithm `{other}` (expected tpe or random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TpeParams {
    /// Trials drawn by random search before the density model kicks in.
    pub n_startup: usize,
    /// Fraction of the history (rounded up) treated as "good".
    pub good_quantile: f64,
    pub n_candidates: usize,
    /// Lower bound on a kernel's bandwidth as a fraction of the range.
    pub bandwidth_floor_fraction: f64,
}

impl Default for TpeParams {
    fn default() -> Self {
        TpeParams {
            n_startup: 3,
            good_quantile: 0.25,
            n_candidates: 24,
            bandwidth_floor_fraction: 1e-3,
        }
    }
}

impl TpeParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| Err(OptimizerError::InvalidParams(reason.to_owned()));
        if self.n_startup == 0 {
            return bad("n_startup must be positive");
        }
        if !(self.good_quantile > 0.0 && self.good_quantile < 1.0) {
            return bad("good_quantile must lie in (0, 1)");
        }
        if self.n_candidates == 0 {
            return bad("n_candidates must be positive");
        }
        if !(self.bandwidth_floor_fraction > 0.0 && self.bandwidth_floor_fraction.is_finite()) {
            return bad("bandwidth_floor_fraction must be positive");
        }
        Ok(())
    }
}

/// Why a trial could not be recorded.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrialFailure {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("objective returned non-finite loss {0}")]
    NonFiniteLoss(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("search space has a choice domain without values")]
    EmptySpace,
    #[error("search space allows no trials")]
    NoTrials,
    #[error("invalid sampler parameters: {0}")]
    InvalidParams(String),
    #[error("trial {index} failed: {cause}")]
    ObjectiveFailure {
        index: usize,
        cause: TrialFailure,
        completed: Vec<TrialResult>,
    },
}

impl OptimizerError {
    pub fn code(&self) -> &'static str {
        match self {
            OptimizerError::EmptySpace => "EmptySpace",
            OptimizerError::NoTrials => "NoTrials",
            OptimizerError::InvalidParams(_) => "InvalidParams",
            OptimizerError::ObjectiveFailure { .. } => "ObjectiveFailure",
        }
    }
}

/// A finished trial loop.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationRun {
    pub space: SearchSpace,
    pub algo: Algo,
    pub seed: u64,
    pub trials: Vec<TrialResult>,
    /// Index of the minimal loss, lowest index on ties.
    pub best: usize,
}

pub const TRIAL_CSV_HEADER: &str =
    "trial,arm,learning_rate,momentum,batch_size,num_epochs,gamma,step_size,loss,accuracy";

/// Index of the first minimal loss.
pub fn best_index(trials: &[TrialResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, t) in trials.iter().enumerate() {
        if best.is_none_or(|b| t.loss < trials[b].loss) {
            best = Some(i);
        }
    }
    best
}

/// Running minimum of the losses.
pub fn best_so_far(trials: &[TrialResult]) -> Vec<f64> {
    trials
        .iter()
        .scan(f64::INFINITY, |acc, t| {
            *acc = acc.min(t.loss);
            Some(*acc)
        })
        .collect()
}

/// Trial log rows, header included.
pub fn trials_to_csv(trials: &[TrialResult], arm: &str) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for t in trials {
        let c = &t.config;
        let steps: Vec<String> = c.step_size.iter().map(u64::to_string).collect();
        let accuracy = t.accuracy.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            t.index,
            csv_field(arm),
            c.learning_rate,
            c.momentum,
            c.batch_size,
            c.num_epochs,
            c.gamma,
            steps.join("|"),
            t.loss,
            accuracy
        )
        .expect("string write");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl OptimizationRun {
    pub fn best_trial(&self) -> &TrialResult {
        &self.trials[self.best]
    }

    pub fn best_loss(&self) -> f64 {
        self.best_trial().loss
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        best_so_far(&self.trials)
    }

    pub fn to_csv(&self, arm: &str) -> String {
        trials_to_csv(&self.trials, arm)
    }
}
