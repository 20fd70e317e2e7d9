use super::{
    best_index, random_sample, seeded_rng, tpe_suggest, Algo, OptimizationRun, OptimizerError,
    TpeParams, TrialFailure, TrialResult,
};
use crate::config::SearchSpace;
use crate::objectives::Objective;

/// Runs `space.trials` sequential trials. Bit-deterministic in
/// `(space, objective, algo, seed, params)`.
pub fn run_optimization(
    space: &SearchSpace,
    objective: &dyn Objective,
    algo: Algo,
    seed: u64,
    params: &TpeParams,
) -> Result<OptimizationRun, OptimizerError> {
    if space.trials == 0 {
        return Err(OptimizerError::NoTrials);
    }
    params.validate()?;
    let mut rng = seeded_rng(seed);
    let mut trials: Vec<TrialResult> = Vec::with_capacity(space.trials as usize);
    for index in 0..space.trials as usize {
        let mut config = match algo {
            Algo::Random => random_sample(space, &mut rng)?,
            Algo::Tpe => tpe_suggest(space, &trials, params, &mut rng)?,
        };
        if space.num_epochs.is_fixed() {
            config.num_epochs = space.epochs_per_trial;
        }
        let evaluation = match objective.evaluate(&config) {
            Ok(e) if e.loss.is_finite() => e,
            Ok(e) => {
                return Err(OptimizerError::ObjectiveFailure {
                    index,
                    cause: TrialFailure::NonFiniteLoss(e.loss),
                    completed: trials,
                })
            }
            Err(e) => {
                return Err(OptimizerError::ObjectiveFailure {
                    index,
                    cause: e.into(),
                    completed: trials,
                })
            }
        };
        trials.push(TrialResult {
            index,
            config,
            loss: evaluation.loss,
            accuracy: evaluation.accuracy.is_finite().then_some(evaluation.accuracy),
        });
    }
    Ok(OptimizationRun {
        space: space.clone(),
        algo,
        seed,
        best: best_index(&trials).expect("at least one trial"),
        trials,
    })
}
