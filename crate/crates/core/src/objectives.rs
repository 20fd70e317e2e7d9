//! Objective functions: an analytic stand-in for fine-tuning loss and an
//! adapter for external trainer processes.

use crate::config::HyperparameterConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{ErrorKind, Write};
use std::process::{Command, Stdio};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("could not spawn `{command}`: {message}")]
    SpawnFailure { command: String, message: String },
    #[error("trainer exited with status {code:?}: {stderr}")]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("trainer output is not a {{\"loss\", \"accuracy\"}} object: {0}")]
    MalformedOutput(String),
}

impl ObjectiveError {
    pub fn code(&self) -> &'static str {
        match self {
            ObjectiveError::SpawnFailure { .. } => "SpawnFailure",
            ObjectiveError::NonZeroExit { .. } => "NonZeroExit",
            ObjectiveError::MalformedOutput(_) => "MalformedOutput",
        }
    }
}

/// Validation metrics of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

pub trait Objective: Send + Sync {
    fn evaluate(&self, config: &HyperparameterConfig) -> Result<Evaluation, ObjectiveError>;
}

impl<F> Objective for F
where
    F: Fn(&HyperparameterConfig) -> Result<Evaluation, ObjectiveError> + Send + Sync,
{
    fn evaluate(&self, config: &HyperparameterConfig) -> Result<Evaluation, ObjectiveError> {
        self(config)
    }
}

/// Optimum placement and noise of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateParams {
    pub opt_lr: f64,
    pub opt_momentum: f64,
    pub opt_gamma: f64,
    pub opt_step_mean: f64,
    /// Upper bound of the additive noise at one epoch; 0 disables it.
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            opt_lr: 0.02,
            opt_momentum: 0.005,
            opt_gamma: 3e-4,
            opt_step_mean: 20.0,
            noise_amplitude: 0.05,
            seed: 0,
        }
    }
}

impl SurrogateParams {
    pub fn noiseless() -> Self {
        SurrogateParams {
            noise_amplitude: 0.0,
            ..SurrogateParams::default()
        }
    }
}

/// Uniform `[0, 1)` draw keyed by the seed and the canonical config.
fn keyed_uniform(seed: u64, config: &HyperparameterConfig) -> f64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(config.to_canonical_json().as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key).gen::<f64>()
}

/// Sum of squared scaled distances to the optimum, plus epoch-damped noise.
/// Learning rate and gamma are compared in decades.
pub fn surrogate_eval(config: &HyperparameterConfig, params: &SurrogateParams) -> Evaluation {
    let lr = config.learning_rate.log10() - params.opt_lr.log10();
    let momentum = (config.momentum - params.opt_momentum) / 0.1;
    let gamma = config.gamma.log10() - params.opt_gamma.log10();
    let step = (config.mean_step() - params.opt_step_mean) / 20.0;
    let mut loss = lr * lr + momentum * momentum + gamma * gamma + step * step;
    if params.noise_amplitude > 0.0 {
        let u = keyed_uniform(params.seed, config);
        loss += params.noise_amplitude / config.num_epochs as f64 * u;
    }
    Evaluation {
        loss,
        accuracy: 1.0 / (1.0 + loss),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surrogate(pub SurrogateParams);

impl Objective for Surrogate {
    fn evaluate(&self, config: &HyperparameterConfig) -> Result<Evaluation, ObjectiveError> {
        Ok(surrogate_eval(config, &self.0))
    }
}

/// Runs `command` through `sh -c`, feeding the canonical config JSON on
/// stdin and reading `{"loss": .., "accuracy": ..}` from stdout.
pub fn external_command_eval(
    config: &HyperparameterConfig,
    command: &str,
) -> Result<Evaluation, ObjectiveError> {
    let spawn_failure = |message: String| ObjectiveError::SpawnFailure {
        command: command.to_owned(),
        message,
    };
    if command.trim().is_empty() {
        return Err(spawn_failure("empty command".into()));
    }
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| spawn_failure(e.to_string()))?;
    {
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let payload = format!("{}\n", config.to_canonical_json());
        if let Err(e) = stdin.write_all(payload.as_bytes()) {
            // a trainer may legitimately exit without reading its input
            if e.kind() != ErrorKind::BrokenPipe {
                return Err(spawn_failure(e.to_string()));
            }
        }
    }
    let output = child
        .wait_with_output()
        .map_err(|e| spawn_failure(e.to_string()))?;
    if !output.status.success() {
        return Err(ObjectiveError::NonZeroExit {
            code: output.status.code(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        });
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    parse_trainer_output(stdout.trim())
}

fn parse_trainer_output(text: &str) -> Result<Evaluation, ObjectiveError> {
    let malformed = || ObjectiveError::MalformedOutput(text.chars().take(200).collect());
    let value: serde_json::Value = serde_json::from_str(text).map_err(|_| malformed())?;
    let loss = value.get("loss").and_then(serde_json::Value::as_f64).ok_or_else(malformed)?;
    let accuracy = value
        .get("accuracy")
        .and_then(serde_json::Value::as_f64)
        .ok_or_else(malformed)?;
    if !loss.is_finite() || !(0.0..=1.0).contains(&accuracy) {
        return Err(malformed());
    }
    Ok(Evaluation { loss, accuracy })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCommand(pub String);

impl Objective for ExternalCommand {
    fn evaluate(&self, config: &HyperparameterConfig) -> Result<Evaluation, ObjectiveError> {
        external_command_eval(config, &self.0)
    }
}
