//! Packaged search spaces, the literature configuration and the two
//! use-case prompt specs used by the comparison experiments.

use crate::config::{parse_config, parse_search_space, HyperparameterConfig, SearchSpace};
use crate::prompting::PromptSpec;

/// Wide, randomly initialised space.
pub const TABLE1_SPACE_JSON: &str = include_str!("../data/table1_space.json");
/// Configuration taken from fine-tuning literature.
pub const TABLE2_CONFIG_JSON: &str = include_str!("../data/table2_config.json");
/// Space proposed by the LLM from the use-case prompt.
pub const TABLE3_SPACE_JSON: &str = include_str!("../data/table3_space.json");
/// Space proposed by the LLM after seeing the prior trials.
pub const TABLE4_SPACE_JSON: &str = include_str!("../data/table4_space.json");

pub const USECASE_SECURITY_JSON: &str = include_str!("../data/usecase_security_cameras.json");
pub const USECASE_FINANCE_JSON: &str = include_str!("../data/usecase_financial_markets.json");

fn space(text: &str) -> SearchSpace {
    parse_search_space(text).expect("packaged space is valid").value
}

pub fn table1_space() -> SearchSpace {
    space(TABLE1_SPACE_JSON)
}

pub fn table2_config() -> HyperparameterConfig {
    parse_config(TABLE2_CONFIG_JSON).expect("packaged config is valid").value
}

pub fn table3_space() -> SearchSpace {
    space(TABLE3_SPACE_JSON)
}

pub fn table4_space() -> SearchSpace {
    space(TABLE4_SPACE_JSON)
}

pub fn usecase_security() -> PromptSpec {
    PromptSpec::from_json(USECASE_SECURITY_JSON).expect("packaged prompt spec is valid")
}

pub fn usecase_finance() -> PromptSpec {
    PromptSpec::from_json(USECASE_FINANCE_JSON).expect("packaged prompt spec is valid")
}
