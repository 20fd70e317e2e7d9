use super::descriptive::stable_mean;
use super::special::{chi_square_survival, f_survival};
use super::StatsError;
use crate::scalar::Real;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult<T> {
    /// `+∞` when every group is constant but the groups differ.
    pub f_stat: T,
    pub f_infinite: bool,
    pub p_value: T,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: T,
    pub ss_within: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KruskalResult<T> {
    /// Tie-corrected H statistic.
    pub h_stat: T,
    pub p_value: T,
    pub df: usize,
}

fn check_groups<T: Real>(groups: &[Vec<T>], min_per_group: usize) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for g in groups {
        if g.len() < min_per_group {
            return Err(StatsError::TooFewValues {
                needed: min_per_group,
                got: g.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFiniteInput);
        }
    }
    Ok(())
}

/// One-way analysis of variance with the exact F-distribution p-value.
pub fn anova_one_way<T: Real>(groups: &[Vec<T>]) -> Result<AnovaResult<T>, StatsError> {
    check_groups(groups, 2)?;
    let first = groups[0][0];
    if groups.iter().flatten().all(|&x| x == first) {
        return Err(StatsError::DegenerateGroups);
    }

    let k = groups.len();
    let total: usize = groups.iter().map(Vec::len).sum();
    let means: Vec<T> = groups.iter().map(|g| stable_mean(g)).collect();
    let all: Vec<T> = groups.iter().flatten().copied().collect();
    let grand = stable_mean(&all);

    let ss_between: T = groups
        .iter()
        .zip(&means)
        .map(|(g, &m)| T::from_count(g.len()) * (m - grand) * (m - grand))
        .sum();
    let ss_within: T = groups
        .iter()
        .zip(&means)
        .map(|(g, &m)| g.iter().map(|&x| (x - m) * (x - m)).sum::<T>())
        .sum();

    let df_between = k - 1;
    let df_within = total - k;
    let (f_stat, f_infinite, p_value) = if ss_within == T::zero() {
        (T::infinity(), true, T::zero())
    } else {
        let f = (ss_between / T::from_count(df_between)) / (ss_within / T::from_count(df_within));
        let p = f_survival(f, T::from_count(df_between), T::from_count(df_within));
        (f, false, p)
    };
    Ok(AnovaResult {
        f_stat,
        f_infinite,
        p_value,
        df_between,
        df_within,
        ss_between,
        ss_within,
    })
}

/// Average ranks (1-based) of the pooled data plus the tie sizes.
fn pooled_ranks<T: Real>(values: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values are ordered"));
    let mut ranks = vec![T::zero(); values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let avg = T::from_count(i + 1 + j) / T::lit(2.0);
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Kruskal-Wallis H test with tie correction and chi-square p-value.
pub fn kruskal_wallis<T: Real>(groups: &[Vec<T>]) -> Result<KruskalResult<T>, StatsError> {
    check_groups(groups, 1)?;
    let pooled: Vec<T> = groups.iter().flatten().copied().collect();
    let n = pooled.len();
    if n < 5 {
        return Err(StatsError::TooFewValues { needed: 5, got: n });
    }
    let (ranks, ties) = pooled_ranks(&pooled);
    let nf = T::from_count(n);
    let tie_sum: T = ties
        .iter()
        .map(|&t| {
            let t = T::from_count(t);
            t * t * t - t
        })
        .sum();
    let correction = T::one() - tie_sum / (nf * nf * nf - nf);
    if correction <= T::zero() {
        return Err(StatsError::AllTied);
    }

    // deviation form keeps H exactly 0 when every mean rank is (N+1)/2
    let center = (nf + T::one()) / T::lit(2.0);
    let mut offset = 0;
    let mut spread = T::zero();
    for g in groups {
        let rank_sum: T = ranks[offset..offset + g.len()].iter().copied().sum();
        let size = T::from_count(g.len());
        let dev = rank_sum / size - center;
        spread = spread + size * dev * dev;
        offset += g.len();
    }
    let h = (T::lit(12.0) / (nf * (nf + T::one())) * spread / correction).max(T::zero());
    let df = groups.len() - 1;
    Ok(KruskalResult {
        h_stat: h,
        p_value: chi_square_survival(h, T::from_count(df)),
        df,
    })
}
