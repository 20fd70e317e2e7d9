//! Chat prompts for use-case queries and for search-space refinement.
//!
//! Conversations are a single system turn followed by a single user turn.
//! The user turn uses labeled sections in a fixed order so rendering is
//! byte-deterministic.

use crate::config::{HyperparameterConfig, SearchSpace};
use crate::optimizer::TrialResult;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Casts the model as an experienced practitioner.
pub const DEFAULT_SYSTEM_PROMPT: &str = "I want you to be a Machine Learning expert. You have the knowledge of training and finetuining various machine learning models for various tasks. I want you to use this knowledge to aid me in an experiment";

/// Output instruction used when asking for a single configuration.
pub const CONFIG_OUTPUT_FORMAT: &str = "Return only a JSON object with keys learning_rate, momentum, batch_size, num_epochs, gamma, step_size";

/// Output instruction used when asking for a search space.
pub const SPACE_OUTPUT_FORMAT: &str = "Return only a JSON object with keys learning_rate, momentum, batch_size, num_epochs, gamma, step_size, trials, epochs_per_trial. Each hyperparameter key maps to a domain object with a \"type\" of fixed (value), uniform (lo, hi), loguniform (lo_exp, hi_exp as base-10 exponents), uniformint (lo, hi) or choice (values)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("refinement prompt needs at least one trial")]
    NoTrials,
    #[error("target trial count must be positive")]
    ZeroTarget,
    #[error("malformed prompt spec: {0}")]
    Json(String),
}

impl PromptError {
    pub fn code(&self) -> &'static str {
        match self {
            PromptError::EmptyField(_) => "EmptyField",
            PromptError::NoTrials => "NoTrials",
            PromptError::ZeroTarget => "ZeroTarget",
            PromptError::Json(_) => "MalformedJson",
        }
    }
}

fn default_system_prompt() -> String {
    DEFAULT_SYSTEM_PROMPT.to_owned()
}

/// Structured description of one use case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    #[serde(default = "default_system_prompt")]
    pub system_prompt: String,
    pub task: String,
    pub objective: String,
    pub dataset_description: String,
    pub model_description: String,
    pub output_format: String,
}

impl PromptSpec {
    pub fn from_json(text: &str) -> Result<PromptSpec, PromptError> {
        let spec: PromptSpec =
            serde_json::from_str(text).map_err(|e| PromptError::Json(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        let fields = [
            ("system_prompt", &self.system_prompt),
            ("task", &self.task),
            ("objective", &self.objective),
            ("dataset_description", &self.dataset_description),
            ("model_description", &self.model_description),
            ("output_format", &self.output_format),
        ];
        for (name, value) in fields {
            if value.trim().is_empty() {
                return Err(PromptError::EmptyField(name));
            }
        }
        Ok(())
    }

    /// Same use case, but asking for a search space instead of a config.
    pub fn for_search_space(&self) -> PromptSpec {
        PromptSpec {
            output_format: SPACE_OUTPUT_FORMAT.to_owned(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Message {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Message {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// Renders the system + user turns for a use-case query.
pub fn render_usecase_prompt(spec: &PromptSpec) -> Result<Vec<Message>, PromptError> {
    spec.validate()?;
    let sections = [
        ("TASK", &spec.task),
        ("OBJECTIVE", &spec.objective),
        ("DATASET", &spec.dataset_description),
        ("MODEL", &spec.model_description),
        ("OUTPUT FORMAT", &spec.output_format),
    ];
    let user = sections
        .iter()
        .map(|(label, body)| format!("{label}:\n{}", body.trim()))
        .collect::<Vec<_>>()
        .join("\n\n");
    Ok(vec![Message::system(spec.system_prompt.trim()), Message::user(user)])
}

#[derive(Serialize)]
struct TrialLine<'a> {
    trial: usize,
    config: &'a HyperparameterConfig,
    validation_loss: f64,
    validation_accuracy: Option<f64>,
}

/// Renders a refinement request with the default system prompt.
pub fn render_refinement_prompt(
    space: &SearchSpace,
    trials: &[TrialResult],
    target_trials: u64,
) -> Result<Vec<Message>, PromptError> {
    render_refinement_prompt_with_system(DEFAULT_SYSTEM_PROMPT, space, trials, target_trials)
}

pub fn render_refinement_prompt_with_system(
    system_prompt: &str,
    space: &SearchSpace,
    trials: &[TrialResult],
    target_trials: u64,
) -> Result<Vec<Message>, PromptError> {
    if system_prompt.trim().is_empty() {
        return Err(PromptError::EmptyField("system_prompt"));
    }
    if trials.is_empty() {
        return Err(PromptError::NoTrials);
    }
    if target_trials == 0 {
        return Err(PromptError::ZeroTarget);
    }

    let mut user = String::new();
    user.push_str("TASK:\nRefine a hyperparameter search space for Bayesian optimization using the results of the trials already run in it.\n\n");
    user.push_str("PRIOR SEARCH SPACE:\n```json\n");
    user.push_str(&space.to_pretty_json());
    user.push_str("\n```\n\n");
    user.push_str("TRIAL RESULTS (one JSON object per trial, lower validation loss is better):\n```json\n");
    for trial in trials {
        let line = TrialLine {
            trial: trial.index,
            config: &trial.config,
            validation_loss: trial.loss,
            validation_accuracy: trial.accuracy,
        };
        let line = serde_json::to_string(&line).expect("trial serialization is infallible");
        writeln!(user, "{line}").expect("writing to a String cannot fail");
    }
    user.push_str("```\n\n");
    write!(
        user,
        "OUTPUT FORMAT:\nPropose a narrower search space that reaches an equal or lower validation loss within {target_trials} trials. \
         Return only a JSON object with the same schema as the prior search space, with \"trials\" set to {target_trials}."
    )
    .expect("writing to a String cannot fail");

    Ok(vec![Message::system(system_prompt.trim()), Message::user(user)])
}
