use super::StatsError;
use crate::scalar::Real;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersion<T> {
    pub n: usize,
    pub mean: T,
    /// Sample variance (divisor `n − 1`).
    pub variance: T,
    pub std: T,
    pub q1: T,
    pub q3: T,
    pub iqr: T,
}

/// Linear-interpolation (type 7) quantile of already sorted data.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = T::from_count(sorted.len() - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    if i + 1 >= sorted.len() {
        return sorted[i];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// Mean that is exact for constant input.
pub(crate) fn stable_mean<T: Real>(values: &[T]) -> T {
    let pivot = values[0];
    if values.iter().all(|&x| x == pivot) {
        return pivot;
    }
    let shift: T = values.iter().map(|&x| x - pivot).sum();
    pivot + shift / T::from_count(values.len())
}

/// Sample variance, standard deviation and interquartile range.
pub fn dispersion<T: Real>(values: &[T]) -> Result<Dispersion<T>, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues {
            needed: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let n = values.len();
    let mean = stable_mean(values);
    let deviations = values.iter().map(|&x| x - mean);
    let sum_sq: T = deviations.clone().map(|d| d * d).sum();
    // second-pass correction for the rounding left in `mean`
    let sum_dev: T = deviations.sum();
    let nf = T::from_count(n);
    let variance = ((sum_sq - sum_dev * sum_dev / nf) / (nf - T::one())).max(T::zero());

    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
    let q1 = quantile_sorted(&sorted, T::lit(0.25));
    let q3 = quantile_sorted(&sorted, T::lit(0.75));
    Ok(Dispersion {
        n,
        mean,
        variance,
        std: variance.sqrt(),
        q1,
        q3,
        iqr: q3 - q1,
    })
}
