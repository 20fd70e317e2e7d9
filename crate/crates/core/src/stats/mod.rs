//! Response-variability statistics: dispersion, one-way ANOVA,
//! Kruskal-Wallis and Jaccard diversity.
//!
//! The numerical routines are generic over [`Real`](crate::scalar::Real);
//! the report builders work on `f64` columns pulled from parsed configs.

mod descriptive;
mod hypothesis;
mod report;
pub mod special;

pub use descriptive::{dispersion, quantile_sorted, Dispersion};
pub use hypothesis::{anova_one_way, kruskal_wallis, AnovaResult, KruskalResult};
pub use report::{
    build_reports, AnovaSummary, AttributeComparison, AttributeVariability, ComparisonReport,
    KruskalSummary, Reports, TestKind, VariabilityReport,
};

use std::collections::HashSet;
use std::hash::Hash;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("need at least two groups")]
    TooFewGroups,
    #[error("every observation is identical across all groups")]
    DegenerateGroups,
    #[error("all observations are tied")]
    AllTied,
    #[error("both sets are empty")]
    BothEmpty,
    #[error("{batch} has {got} parsed configs; at least 2 are needed")]
    InsufficientSamples { batch: String, got: usize },
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::TooFewValues { .. } => "TooFewValues",
            StatsError::NonFiniteInput => "NonFiniteInput",
            StatsError::TooFewGroups => "TooFewGroups",
            StatsError::DegenerateGroups => "DegenerateGroups",
            StatsError::AllTied => "AllTied",
            StatsError::BothEmpty => "BothEmpty",
            StatsError::InsufficientSamples { .. } => "InsufficientSamples",
        }
    }
}

/// `|a ∩ b| / |a ∪ b|`.
pub fn jaccard<E: Eq + Hash>(a: &HashSet<E>, b: &HashSet<E>) -> Result<f64, StatsError> {
    let union = a.union(b).count();
    if union == 0 {
        return Err(StatsError::BothEmpty);
    }
    Ok(a.intersection(b).count() as f64 / union as f64)
}
