use super::plan::Payload;
use super::{median, ArmSpec, ExperimentPlan, RunnerError};
use crate::config::{parse_config, parse_search_space, SearchSpace};
use crate::llm::{extract_json_block, ChatRequest, Transport};
use crate::optimizer::{run_optimization, Algo, OptimizationRun};
use crate::prompting::{render_refinement_prompt, render_usecase_prompt, Message};
use serde::Serialize;
use std::thread;

/// Per-arm aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: String,
    pub algo: Algo,
    pub seeds: Vec<u64>,
    pub per_seed_best: Vec<f64>,
    pub median_best_loss: f64,
    /// Median over seeds of the running minimum, per trial index.
    pub curve: Vec<f64>,
}

impl ArmSummary {
    fn from_runs(arm: &str, algo: Algo, seeds: &[u64], runs: &[OptimizationRun]) -> ArmSummary {
        let per_seed_best: Vec<f64> = runs.iter().map(OptimizationRun::best_loss).collect();
        let curves: Vec<Vec<f64>> = runs.iter().map(OptimizationRun::best_so_far).collect();
        let len = curves.iter().map(Vec::len).min().unwrap_or(0);
        let curve = (0..len)
            .map(|t| median(&curves.iter().map(|c| c[t]).collect::<Vec<_>>()))
            .collect();
        ArmSummary {
            arm: arm.to_owned(),
            algo,
            seeds: seeds.to_vec(),
            median_best_loss: median(&per_seed_best),
            per_seed_best,
            curve,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmRuns {
    pub space: SearchSpace,
    /// In seed order.
    pub runs: Vec<OptimizationRun>,
    pub summary: ArmSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmFailure {
    pub code: String,
    pub message: String,
}

impl ArmFailure {
    fn new(code: &str, message: impl Into<String>) -> ArmFailure {
        ArmFailure {
            code: code.to_owned(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmOutcome {
    pub name: String,
    pub result: Result<ArmRuns, ArmFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub arms: Vec<ArmOutcome>,
}

impl ExperimentOutcome {
    pub fn arm(&self, name: &str) -> Option<&ArmOutcome> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn summaries(&self) -> Vec<&ArmSummary> {
        self.arms
            .iter()
            .filter_map(|a| a.result.as_ref().ok().map(|r| &r.summary))
            .collect()
    }
}

/// One run per seed, spread over the available cores; results keep seed
/// order so the outcome does not depend on scheduling.
fn run_seeds(space: &SearchSpace, arm: &ArmSpec) -> Result<Vec<OptimizationRun>, ArmFailure> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(arm.seeds.len());
    let chunk = arm.seeds.len().div_ceil(workers);
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = arm
            .seeds
            .chunks(chunk)
            .map(|seeds| {
                scope.spawn(move || {
                    seeds
                        .iter()
                        .map(|&seed| {
                            let objective = arm.objective.build(seed);
                            run_optimization(space, objective.as_ref(), arm.algo, seed, &arm.tpe)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("seed worker panicked"))
            .collect()
    });
    results
        .into_iter()
        .zip(&arm.seeds)
        .map(|(r, seed)| r.map_err(|e| ArmFailure::new(e.code(), format!("seed {seed}: {e}"))))
        .collect()
}

fn ask(
    plan: &ExperimentPlan,
    transport: &dyn Transport,
    call: usize,
    messages: Vec<Message>,
) -> Result<String, ArmFailure> {
    let request = ChatRequest::new(plan.model_name.clone(), messages).with_temperature(plan.temperature);
    let reply = transport
        .send_at(call, &request)
        .map_err(|e| ArmFailure::new(e.code(), e.to_string()))?;
    extract_json_block(&reply).map_err(|e| ArmFailure::new(e.code(), e.to_string()))
}

fn parse_space(block: &str) -> Result<SearchSpace, ArmFailure> {
    parse_search_space(block)
        .map(|p| p.value)
        .map_err(|e| ArmFailure::new(e.code(), e.to_string()))
}

/// Runs every arm in declaration order. A failing arm is recorded and only
/// the arms refining it are skipped.
///
/// Plan errors, and LLM-backed arms without a transport, are reported
/// before anything runs.
pub fn run_experiment(
    plan: &ExperimentPlan,
    transport: Option<&dyn Transport>,
) -> Result<ExperimentOutcome, RunnerError> {
    let payloads = plan.check()?;
    if transport.is_none() {
        if let Some(arm) = plan.arms.iter().find(|a| a.needs_llm()) {
            return Err(RunnerError::InvalidPlan(format!(
                "arm `{}` needs an LLM transport",
                arm.name
            )));
        }
    }

    let mut outcomes: Vec<ArmOutcome> = Vec::with_capacity(plan.arms.len());
    let mut llm_rank = 0;
    for (arm, payload) in plan.arms.iter().zip(payloads) {
        let call = if arm.needs_llm() {
            llm_rank += 1;
            arm.llm_call_index.unwrap_or(llm_rank - 1)
        } else {
            0
        };
        let space = match payload {
            Payload::Space(space) => Ok(space),
            Payload::Prompt(spec) => {
                let messages = render_usecase_prompt(&spec.for_search_space())
                    .map_err(|e| RunnerError::InvalidPlan(e.to_string()))?;
                ask(plan, transport.expect("checked above"), call, messages).and_then(|b| parse_space(&b))
            }
            Payload::Refine { from } => match &outcomes[from].result {
                Err(_) => Err(ArmFailure::new(
                    "DependencyFailed",
                    format!("source arm `{}` failed", outcomes[from].name),
                )),
                Ok(source) => {
                    let run = &source.runs[arm.refine_seed_index];
                    let target = arm.target_trials.unwrap_or(source.space.trials);
                    render_refinement_prompt(&source.space, &run.trials, target)
                        .map_err(|e| ArmFailure::new(e.code(), e.to_string()))
                        .and_then(|messages| ask(plan, transport.expect("checked above"), call, messages))
                        .and_then(|b| parse_space(&b))
                }
            },
            Payload::Config(config) => Ok(SearchSpace::fixed(&config, arm.trials)),
            Payload::Reply(reply) => extract_json_block(&reply)
                .map_err(|e| ArmFailure::new(e.code(), e.to_string()))
                .and_then(|block| parse_config(&block).map_err(|e| ArmFailure::new(e.code(), e.to_string())))
                .map(|parsed| SearchSpace::fixed(&parsed.value, arm.trials)),
        };
        let result = space.and_then(|space| {
            let runs = run_seeds(&space, arm)?;
            let summary = ArmSummary::from_runs(&arm.name, arm.algo, &arm.seeds, &runs);
            Ok(ArmRuns { space, runs, summary })
        });
        outcomes.push(ArmOutcome {
            name: arm.name.clone(),
            result,
        });
    }
    Ok(ExperimentOutcome { arms: outcomes })
}
