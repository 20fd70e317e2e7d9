use super::sampler::{assemble, random_sample, Draw};
use super::{OptimizerError, TpeParams, TrialResult};
use crate::config::{Attribute, AttributeKind, Domain, HyperparameterConfig, SearchSpace, Value};
use crate::stats::special::normal_cdf;
use rand::Rng;
use rand_distr::StandardNormal;

const BAD_DENSITY_FLOOR: f64 = 1e-12;
const MAX_REJECTIONS: usize = 100;

/// How one attribute is modelled.
enum Dim {
    Fixed(Draw),
    Continuous {
        lo: f64,
        hi: f64,
        log: bool,
        integer: bool,
        milestones: bool,
    },
    Categorical(Vec<Value>),
}

impl Dim {
    fn new(domain: &Domain, kind: AttributeKind) -> Result<Dim, OptimizerError> {
        Ok(match domain {
            Domain::Fixed { value } => Dim::Fixed(match kind {
                AttributeKind::Milestones => Draw::Steps(value.as_milestones().unwrap_or_default()),
                _ => Draw::Real(value.as_number().unwrap_or(f64::NAN)),
            }),
            Domain::Uniform { lo, hi } => Dim::Continuous {
                lo: *lo,
                hi: *hi,
                log: false,
                integer: false,
                milestones: false,
            },
            Domain::LogUniform { lo_exp, hi_exp } => Dim::Continuous {
                lo: *lo_exp,
                hi: *hi_exp,
                log: true,
                integer: false,
                milestones: false,
            },
            Domain::UniformInt { lo, hi } => Dim::Continuous {
                lo: *lo as f64,
                hi: *hi as f64,
                log: false,
                integer: true,
                milestones: kind == AttributeKind::Milestones,
            },
            Domain::Choice { values } if values.is_empty() => return Err(OptimizerError::EmptySpace),
            Domain::Choice { values } => Dim::Categorical(values.clone()),
        })
    }

    /// Model coordinate of a config: exponent for log domains, category
    /// index for choices.
    fn coordinate(&self, attr: Attribute, config: &HyperparameterConfig) -> Option<f64> {
        match self {
            Dim::Fixed(_) => None,
            Dim::Continuous { log, .. } => {
                let x = config.scalar(attr);
                Some(if *log { x.log10() } else { x })
            }
            Dim::Categorical(values) => {
                let found = if attr == Attribute::StepSize {
                    values
                        .iter()
                        .position(|v| v.as_milestones().as_deref() == Some(config.step_size.as_slice()))
                } else {
                    let x = config.scalar(attr);
                    values.iter().position(|v| v.as_number() == Some(x))
                };
                found.map(|i| i as f64)
            }
        }
        .filter(|x| x.is_finite())
    }
}

/// Truncated Gaussian mixture over `[lo, hi]`: one kernel per observation
/// with a shared bandwidth, plus a prior kernel spanning the whole range.
struct Parzen {
    centers: Vec<f64>,
    bandwidth: f64,
    lo: f64,
    hi: f64,
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

impl Parzen {
    /// The kernel spread comes from `pooled`, every observation of the
    /// dimension, so a one-point group is not collapsed onto the floor.
    fn fit(centers: Vec<f64>, pooled: &[f64], lo: f64, hi: f64, floor_fraction: f64) -> Parzen {
        let spread = sample_std(pooled);
        let m = centers.len().max(1) as f64;
        let bandwidth = (spread * m.powf(-0.2)).max((hi - lo) * floor_fraction);
        Parzen {
            centers,
            bandwidth,
            lo,
            hi,
        }
    }

    /// Kernels as `(center, bandwidth)`, the wide prior kernel first.
    fn kernels(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let prior = ((self.lo + self.hi) / 2.0, self.hi - self.lo);
        std::iter::once(prior).chain(self.centers.iter().map(|&mu| (mu, self.bandwidth)))
    }

    fn density(&self, x: f64) -> f64 {
        let norm = (2.0 * std::f64::consts::PI).sqrt();
        let total: f64 = self
            .kernels()
            .map(|(mu, h)| {
                let mass = normal_cdf((self.hi - mu) / h) - normal_cdf((self.lo - mu) / h);
                let z = (x - mu) / h;
                (-0.5 * z * z).exp() / (norm * h * mass.max(f64::MIN_POSITIVE))
            })
            .sum();
        total / (self.centers.len() + 1) as f64
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (mu, h) = self
            .kernels()
            .nth(rng.gen_range(0..=self.centers.len()))
            .expect("index within kernel count");
        for _ in 0..MAX_REJECTIONS {
            let z: f64 = rng.sample(StandardNormal);
            let x = mu + h * z;
            if (self.lo..=self.hi).contains(&x) {
                return x;
            }
        }
        mu.clamp(self.lo, self.hi)
    }
}

/// Laplace-smoothed category frequencies.
struct Categories {
    probs: Vec<f64>,
}

impl Categories {
    fn fit(observed: &[f64], k: usize) -> Categories {
        let mut counts = vec![1.0; k];
        for &i in observed {
            counts[i as usize] += 1.0;
        }
        let total = (observed.len() + k) as f64;
        Categories {
            probs: counts.into_iter().map(|c| c / total).collect(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

enum Model {
    Fixed(Draw),
    Continuous {
        good: Parzen,
        bad: Parzen,
        log: bool,
        integer: bool,
        milestones: bool,
    },
    Categorical {
        good: Categories,
        bad: Categories,
        values: Vec<Value>,
        kind: AttributeKind,
    },
}

impl Model {
    /// Draws from the good density; returns the config value and the
    /// log density ratio at that point.
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Draw, f64) {
        match self {
            Model::Fixed(draw) => (draw.clone(), 0.0),
            Model::Continuous {
                good,
                bad,
                log,
                integer,
                milestones,
            } => {
                let mut x = good.sample(rng);
                if *integer {
                    x = x.round().clamp(good.lo, good.hi);
                }
                let score = log_ratio(good.density(x), bad.density(x));
                let draw = if *milestones {
                    Draw::Steps(vec![x as u64])
                } else if *log {
                    Draw::Real(10f64.powf(x))
                } else {
                    Draw::Real(x)
                };
                (draw, score)
            }
            Model::Categorical {
                good,
                bad,
                values,
                kind,
            } => {
                let i = good.sample(rng);
                let draw = match kind {
                    AttributeKind::Milestones => Draw::Steps(values[i].as_milestones().unwrap_or_default()),
                    _ => Draw::Real(values[i].as_number().unwrap_or(f64::NAN)),
                };
                (draw, log_ratio(good.probs[i], bad.probs[i]))
            }
        }
    }
}

fn log_ratio(good: f64, bad: f64) -> f64 {
    good.max(f64::MIN_POSITIVE).ln() - bad.max(BAD_DENSITY_FLOOR).ln()
}

fn build_model(
    attr: Attribute,
    dim: Dim,
    good: &[&TrialResult],
    bad: &[&TrialResult],
    floor_fraction: f64,
) -> Model {
    let coords = |group: &[&TrialResult]| -> Vec<f64> {
        group
            .iter()
            .filter_map(|t| dim.coordinate(attr, &t.config))
            .collect()
    };
    let good_x = coords(good);
    let bad_x = coords(bad);
    match dim {
        Dim::Fixed(draw) => Model::Fixed(draw),
        Dim::Continuous {
            lo,
            hi,
            log,
            integer,
            milestones,
        } => {
            let pooled: Vec<f64> = good_x.iter().chain(&bad_x).copied().collect();
            let clip = |xs: Vec<f64>| -> Vec<f64> { xs.into_iter().map(|x| x.clamp(lo, hi)).collect() };
            let good_x = clip(good_x);
            let bad_x = clip(bad_x);
            Model::Continuous {
                good: Parzen::fit(good_x, &pooled, lo, hi, floor_fraction),
                bad: Parzen::fit(bad_x, &pooled, lo, hi, floor_fraction),
                log,
                integer,
                milestones,
            }
        }
        Dim::Categorical(values) => Model::Categorical {
            good: Categories::fit(&good_x, values.len()),
            bad: Categories::fit(&bad_x, values.len()),
            values,
            kind: attr.kind(),
        },
    }
}

/// Next configuration given the trial history.
///
/// Below `n_startup` trials this is exactly [`random_sample`] on the same
/// RNG stream. Afterwards the history is split by loss into a good quantile
/// and the rest, each attribute gets a good and a bad density, and the
/// best of `n_candidates` draws from the good model by summed log density
/// ratio is returned.
pub fn tpe_suggest<R: Rng + ?Sized>(
    space: &SearchSpace,
    history: &[TrialResult],
    params: &TpeParams,
    rng: &mut R,
) -> Result<HyperparameterConfig, OptimizerError> {
    if history.is_empty() || history.len() < params.n_startup {
        return random_sample(space, rng);
    }
    let mut order: Vec<&TrialResult> = history.iter().collect();
    order.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.index.cmp(&b.index)));
    let n_good = ((params.good_quantile * order.len() as f64).ceil() as usize).clamp(1, order.len());
    let (good, bad) = order.split_at(n_good);

    let models = Attribute::ALL
        .iter()
        .map(|&attr| {
            let dim = Dim::new(space.domain(attr), attr.kind())?;
            Ok(build_model(attr, dim, good, bad, params.bandwidth_floor_fraction))
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;

    let mut best: Option<(f64, Vec<Draw>)> = None;
    for _ in 0..params.n_candidates {
        let mut score = 0.0;
        let draws: Vec<Draw> = models
            .iter()
            .map(|m| {
                let (draw, s) = m.propose(rng);
                score += s;
                draw
            })
            .collect();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, draws));
        }
    }
    let (_, draws) = best.expect("n_candidates is positive");
    Ok(assemble(draws))
}
