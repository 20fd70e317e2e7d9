//! LLM-seeded hyperparameter search.
//!
//! Builds chat prompts for hyperparameter suggestions, collects and parses
//! LLM replies, measures how much the replies vary, and runs a TPE trial
//! loop over the suggested search spaces against pluggable objectives.

pub mod cli;
pub mod config;
pub mod llm;
pub mod objectives;
pub mod optimizer;
pub mod presets;
pub mod prompting;
pub mod runner;
pub mod scalar;
pub mod stats;

pub use config::{parse_config, parse_search_space, space_contains, Domain, HyperparameterConfig, SearchSpace};
pub use optimizer::{run_optimization, Algo, OptimizationRun, TpeParams, TrialResult};
pub use scalar::Real;

/// Double-precision instantiations of the generic statistics types.
pub type Dispersion = stats::Dispersion<f64>;
pub type AnovaResult = stats::AnovaResult<f64>;
pub type KruskalResult = stats::KruskalResult<f64>;

/// Single-precision variants, for callers holding `f32` metrics.
pub type Dispersion32 = stats::Dispersion<f32>;
pub type AnovaResult32 = stats::AnovaResult<f32>;
pub type KruskalResult32 = stats::KruskalResult<f32>;
