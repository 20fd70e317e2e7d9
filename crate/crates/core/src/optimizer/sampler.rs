use super::OptimizerError;
use crate::config::{Attribute, AttributeKind, Domain, HyperparameterConfig, SearchSpace, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RNG driving every sampler; one stream per run.
pub type OptRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> OptRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A value drawn for one attribute before assembly into a config.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Draw {
    Real(f64),
    Steps(Vec<u64>),
}

impl Draw {
    fn from_value(value: &Value, kind: AttributeKind) -> Draw {
        match kind {
            AttributeKind::Milestones => Draw::Steps(value.as_milestones().unwrap_or_default()),
            _ => Draw::Real(value.as_number().unwrap_or(f64::NAN)),
        }
    }
}

pub(crate) fn draw_random<R: Rng + ?Sized>(
    domain: &Domain,
    kind: AttributeKind,
    rng: &mut R,
) -> Result<Draw, OptimizerError> {
    let draw = match domain {
        Domain::Fixed { value } => Draw::from_value(value, kind),
        Domain::Uniform { lo, hi } => Draw::Real(rng.gen_range(*lo..*hi)),
        Domain::LogUniform { lo_exp, hi_exp } => Draw::Real(10f64.powf(rng.gen_range(*lo_exp..*hi_exp))),
        Domain::UniformInt { lo, hi } => {
            let k = rng.gen_range(*lo..=*hi);
            if kind == AttributeKind::Milestones {
                Draw::Steps(vec![k as u64])
            } else {
                Draw::Real(k as f64)
            }
        }
        Domain::Choice { values } => {
            if values.is_empty() {
                return Err(OptimizerError::EmptySpace);
            }
            Draw::from_value(&values[rng.gen_range(0..values.len())], kind)
        }
    };
    Ok(draw)
}

pub(crate) fn assemble(draws: Vec<Draw>) -> HyperparameterConfig {
    let real = |i: usize| match &draws[i] {
        Draw::Real(x) => *x,
        Draw::Steps(s) => s.first().copied().unwrap_or(0) as f64,
    };
    let steps = match &draws[Attribute::StepSize as usize] {
        Draw::Steps(s) => s.clone(),
        Draw::Real(x) => vec![*x as u64],
    };
    HyperparameterConfig {
        learning_rate: real(Attribute::LearningRate as usize),
        momentum: real(Attribute::Momentum as usize),
        batch_size: real(Attribute::BatchSize as usize) as u64,
        num_epochs: real(Attribute::NumEpochs as usize) as u64,
        gamma: real(Attribute::Gamma as usize),
        step_size: steps,
    }
}

/// Independent draw from every domain, in attribute order.
pub fn random_sample<R: Rng + ?Sized>(
    space: &SearchSpace,
    rng: &mut R,
) -> Result<HyperparameterConfig, OptimizerError> {
    let draws = Attribute::ALL
        .iter()
        .map(|&attr| draw_random(space.domain(attr), attr.kind(), rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(draws))
}
