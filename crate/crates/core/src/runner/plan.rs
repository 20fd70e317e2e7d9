use super::RunnerError;
use crate::config::{HyperparameterConfig, SearchSpace};
use crate::llm::DEFAULT_MODEL;
use crate::objectives::{ExternalCommand, Objective, Surrogate, SurrogateParams};
use crate::optimizer::{Algo, TpeParams};
use crate::prompting::PromptSpec;
use serde::Deserialize;
use serde_json::Value as Json;
use std::collections::HashSet;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceSource {
    /// `space_or_config` is a search space.
    InlineSpace,
    /// `space_or_config` is a use-case prompt; the LLM returns the space.
    LlmSuggested,
    /// The LLM narrows the space of `from_arm` given its trials.
    LlmRefined,
    /// `space_or_config` is a config object or a raw LLM reply holding one.
    FixedConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Surrogate,
    External,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    #[serde(default)]
    pub params: SurrogateParams,
    #[serde(default)]
    pub command: Option<String>,
}

impl ObjectiveSpec {
    /// The objective for one seeded run; the surrogate's noise seed is
    /// offset by the run seed.
    pub fn build(&self, run_seed: u64) -> Box<dyn Objective> {
        match self.kind {
            ObjectiveKind::Surrogate => Box::new(Surrogate(SurrogateParams {
                seed: self.params.seed.wrapping_add(run_seed),
                ..self.params
            })),
            ObjectiveKind::External => Box::new(ExternalCommand(self.command.clone().unwrap_or_default())),
        }
    }
}

fn default_algo() -> Algo {
    Algo::Tpe
}

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

fn default_trials() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub name: String,
    pub space_source: SpaceSource,
    #[serde(default)]
    pub space_or_config: Json,
    #[serde(default)]
    pub from_arm: Option<String>,
    #[serde(default = "default_algo")]
    pub algo: Algo,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub tpe: TpeParams,
    /// Which seed of `from_arm` feeds the refinement prompt.
    #[serde(default)]
    pub refine_seed_index: usize,
    /// Trial budget requested from the refining LLM; defaults to the
    /// source arm's budget.
    #[serde(default)]
    pub target_trials: Option<u64>,
    /// Trial count of a fixed-config arm.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Index of the LLM call serving this arm; defaults to the arm's rank
    /// among LLM-backed arms.
    #[serde(default)]
    pub llm_call_index: Option<usize>,
}

impl ArmSpec {
    pub fn needs_llm(&self) -> bool {
        matches!(self.space_source, SpaceSource::LlmSuggested | SpaceSource::LlmRefined)
    }
}

fn default_model() -> String {
    DEFAULT_MODEL.to_owned()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub arms: Vec<ArmSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_model")]
    pub model_name: String,
    #[serde(default)]
    pub temperature: f64,
}

/// A checked arm, with its inline payload already parsed.
#[derive(Debug, Clone)]
pub(crate) enum Payload {
    Space(SearchSpace),
    Prompt(PromptSpec),
    Refine { from: usize },
    Config(HyperparameterConfig),
    /// Raw LLM reply; parsed when the arm runs.
    Reply(String),
}

fn invalid(arm: &str, reason: impl std::fmt::Display) -> RunnerError {
    RunnerError::InvalidPlan(format!("arm `{arm}`: {reason}"))
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<ExperimentPlan, RunnerError> {
        serde_json::from_str(text).map_err(|e| RunnerError::InvalidPlan(e.to_string()))
    }

    /// Checks every arm and parses inline payloads.
    pub(crate) fn check(&self) -> Result<Vec<Payload>, RunnerError> {
        if self.arms.is_empty() {
            return Err(RunnerError::InvalidPlan("plan has no arms".into()));
        }
        if !(self.temperature.is_finite() && (0.0..=2.0).contains(&self.temperature)) {
            return Err(RunnerError::InvalidPlan("temperature must lie in [0, 2]".into()));
        }
        let mut names: Vec<&str> = Vec::new();
        let mut payloads = Vec::new();
        for arm in &self.arms {
            let name = arm.name.as_str();
            if name.is_empty()
                || name == "."
                || name == ".."
                || name.contains(['/', '\\', '\0'])
                || name.contains(['\n', '\r'])
            {
                return Err(RunnerError::InvalidPlan(format!(
                    "arm name `{name}` is not usable as a directory name"
                )));
            }
            if names.contains(&name) {
                return Err(invalid(name, "duplicate arm name"));
            }
            if arm.seeds.is_empty() {
                return Err(invalid(name, "no seeds"));
            }
            if arm.seeds.iter().collect::<HashSet<_>>().len() != arm.seeds.len() {
                return Err(invalid(name, "duplicate seeds"));
            }
            arm.tpe.validate().map_err(|e| invalid(name, e))?;
            if arm.objective.kind == ObjectiveKind::External
                && arm.objective.command.as_deref().is_none_or(|c| c.trim().is_empty())
            {
                return Err(invalid(name, "external objective needs a `command`"));
            }
            if arm.from_arm.is_some() && arm.space_source != SpaceSource::LlmRefined {
                return Err(invalid(name, "`from_arm` only applies to llm_refined arms"));
            }
            let payload = match arm.space_source {
                SpaceSource::InlineSpace => {
                    let space = SearchSpace::from_json_value(&arm.space_or_config)
                        .map_err(|e| invalid(name, e))?
                        .value;
                    Payload::Space(space)
                }
                SpaceSource::LlmSuggested => {
                    let spec: PromptSpec = serde_json::from_value(arm.space_or_config.clone())
                        .map_err(|e| invalid(name, format!("prompt spec: {e}")))?;
                    spec.validate().map_err(|e| invalid(name, e))?;
                    Payload::Prompt(spec)
                }
                SpaceSource::LlmRefined => {
                    let from = arm
                        .from_arm
                        .as_deref()
                        .ok_or_else(|| invalid(name, "llm_refined needs `from_arm`"))?;
                    let index = names
                        .iter()
                        .position(|n| *n == from)
                        .ok_or_else(|| invalid(name, format!("`from_arm` `{from}` is not an earlier arm")))?;
                    let source_seeds = self.arms[index].seeds.len();
                    if arm.refine_seed_index >= source_seeds {
                        return Err(invalid(
                            name,
                            format!("refine_seed_index {} but `{from}` has {source_seeds} seeds", arm.refine_seed_index),
                        ));
                    }
                    if arm.target_trials == Some(0) {
                        return Err(invalid(name, "target_trials must be positive"));
                    }
                    Payload::Refine { from: index }
                }
                SpaceSource::FixedConfig => {
                    if arm.trials == 0 {
                        return Err(invalid(name, "trials must be positive"));
                    }
                    match &arm.space_or_config {
                        Json::String(reply) => Payload::Reply(reply.clone()),
                        other => Payload::Config(
                            HyperparameterConfig::from_json_value(other)
                                .map_err(|e| invalid(name, e))?
                                .value,
                        ),
                    }
                }
            };
            names.push(name);
            payloads.push(payload);
        }
        Ok(payloads)
    }

    /// Validates the plan without running anything.
    pub fn validate(&self) -> Result<(), RunnerError> {
        self.check().map(|_| ())
    }
}
