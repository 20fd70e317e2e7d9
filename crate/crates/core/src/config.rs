//! Hyperparameter configurations, search-space domains and their JSON forms.
//!
//! The attribute set is closed: learning rate, momentum, batch size, number
//! of epochs, the step-scheduler decay factor `gamma` and its milestone list
//! `step_size`. Configs and spaces are parsed by hand from `serde_json::Value`
//! so that every rejection carries the offending attribute name.

use serde::{Serialize, Serializer};
use serde_json::{Map, Value as Json};
use std::fmt;
use thiserror::Error;

/// Largest magnitude accepted for a base-10 exponent bound.
const MAX_EXPONENT: f64 = 300.0;
/// Slack when checking a log-uniform value against its exponent bounds.
const LOG_BOUND_SLACK: f64 = 1e-12;
/// Integers beyond this are not exactly representable as `f64`.
const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("invalid domain for `{field}`: {reason}")]
    InvalidDomain { field: String, reason: String },
    #[error("range for `{field}` is out of order: lo {lo} must be below hi {hi}")]
    RangeOrder { field: String, lo: f64, hi: f64 },
}

impl ConfigError {
    /// Stable machine-readable code used in CLI error output.
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Json(_) => "MalformedJson",
            ConfigError::MissingField(_) => "MissingField",
            ConfigError::InvalidValue { .. } => "InvalidValue",
            ConfigError::InvalidDomain { .. } => "InvalidDomain",
            ConfigError::RangeOrder { .. } => "RangeOrderError",
        }
    }
}

fn invalid_value(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

fn invalid_domain(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidDomain {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

/// Non-fatal oddity found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    UnknownField(String),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnknownField(name) => write!(f, "ignored unknown field `{name}`"),
        }
    }
}

/// A parsed value together with the warnings collected on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    LearningRate,
    Momentum,
    BatchSize,
    NumEpochs,
    Gamma,
    StepSize,
}

/// What kind of value an attribute holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    Real,
    Integer,
    Milestones,
}

impl Attribute {
    /// Canonical order; samplers draw in this order.
    pub const ALL: [Attribute; 6] = [
        Attribute::LearningRate,
        Attribute::Momentum,
        Attribute::BatchSize,
        Attribute::NumEpochs,
        Attribute::Gamma,
        Attribute::StepSize,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Attribute::LearningRate => "learning_rate",
            Attribute::Momentum => "momentum",
            Attribute::BatchSize => "batch_size",
            Attribute::NumEpochs => "num_epochs",
            Attribute::Gamma => "gamma",
            Attribute::StepSize => "step_size",
        }
    }

    pub fn kind(self) -> AttributeKind {
        match self {
            Attribute::LearningRate | Attribute::Momentum | Attribute::Gamma => AttributeKind::Real,
            Attribute::BatchSize | Attribute::NumEpochs => AttributeKind::Integer,
            Attribute::StepSize => AttributeKind::Milestones,
        }
    }

    /// Resolves a canonical key or one of the accepted aliases.
    pub fn from_key(key: &str) -> Option<Attribute> {
        let attr = match key {
            "learning_rate" | "lr" | "learningRate" => Attribute::LearningRate,
            "momentum" => Attribute::Momentum,
            "batch_size" | "batchSize" => Attribute::BatchSize,
            "num_epochs" | "epochs" | "numEpochs" => Attribute::NumEpochs,
            "gamma" => Attribute::Gamma,
            "step_size" | "stepSize" => Attribute::StepSize,
            _ => return None,
        };
        Some(attr)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Serializes integral reals without a fractional part (`-4` rather than
/// `-4.0`); everything else uses the shortest round-trip form.
pub(crate) fn serialize_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < MAX_EXACT_INT {
        s.serialize_i64(*x as i64)
    } else {
        s.serialize_f64(*x)
    }
}

/// One concrete configuration, as emitted by the LLM for a single query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperparameterConfig {
    #[serde(serialize_with = "serialize_real")]
    pub learning_rate: f64,
    #[serde(serialize_with = "serialize_real")]
    pub momentum: f64,
    pub batch_size: u64,
    pub num_epochs: u64,
    #[serde(serialize_with = "serialize_real")]
    pub gamma: f64,
    pub step_size: Vec<u64>,
}

impl HyperparameterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_real(Attribute::LearningRate, self.learning_rate)?;
        check_real(Attribute::Momentum, self.momentum)?;
        check_integer(Attribute::BatchSize, self.batch_size)?;
        check_integer(Attribute::NumEpochs, self.num_epochs)?;
        check_real(Attribute::Gamma, self.gamma)?;
        check_milestones(&self.step_size)
    }

    /// Compact canonical JSON (fixed key order, shortest reals).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization is infallible")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    /// Scalar view of an attribute; `step_size` collapses to its mean.
    pub fn scalar(&self, attr: Attribute) -> f64 {
        match attr {
            Attribute::LearningRate => self.learning_rate,
            Attribute::Momentum => self.momentum,
            Attribute::BatchSize => self.batch_size as f64,
            Attribute::NumEpochs => self.num_epochs as f64,
            Attribute::Gamma => self.gamma,
            Attribute::StepSize => mean_milestone(&self.step_size),
        }
    }

    pub fn mean_step(&self) -> f64 {
        mean_milestone(&self.step_size)
    }

    pub fn from_json_value(value: &Json) -> Result<Parsed<Self>, ConfigError> {
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError::Json("expected a JSON object".into()))?;
        let mut warnings = Vec::new();
        let mut slots: [Option<&Json>; 6] = [None; 6];
        for (key, v) in obj {
            match Attribute::from_key(key) {
                Some(attr) => {
                    let slot = &mut slots[attr as usize];
                    if slot.is_some() {
                        return Err(invalid_value(
                            attr.key(),
                            format!("given more than once (last spelling `{key}`)"),
                        ));
                    }
                    *slot = Some(v);
                }
                None => warnings.push(Warning::UnknownField(key.clone())),
            }
        }
        let get = |attr: Attribute| {
            slots[attr as usize].ok_or_else(|| ConfigError::MissingField(attr.key().to_owned()))
        };
        let config = HyperparameterConfig {
            learning_rate: real_field(Attribute::LearningRate, get(Attribute::LearningRate)?)?,
            momentum: real_field(Attribute::Momentum, get(Attribute::Momentum)?)?,
            batch_size: integer_field(Attribute::BatchSize, get(Attribute::BatchSize)?)?,
            num_epochs: integer_field(Attribute::NumEpochs, get(Attribute::NumEpochs)?)?,
            gamma: real_field(Attribute::Gamma, get(Attribute::Gamma)?)?,
            step_size: milestones_field(get(Attribute::StepSize)?)?,
        };
        config.validate()?;
        Ok(Parsed {
            value: config,
            warnings,
        })
    }
}

fn mean_milestone(steps: &[u64]) -> f64 {
    if steps.is_empty() {
        return 0.0;
    }
    steps.iter().map(|&s| s as f64).sum::<f64>() / steps.len() as f64
}

/// Parses one LLM-style configuration document.
pub fn parse_config(text: &str) -> Result<Parsed<HyperparameterConfig>, ConfigError> {
    let value: Json = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    HyperparameterConfig::from_json_value(&value)
}

fn json_number(field: &str, v: &Json) -> Result<f64, ConfigError> {
    let x = v
        .as_f64()
        .ok_or_else(|| invalid_value(field, format!("expected a number, got {v}")))?;
    if !x.is_finite() {
        return Err(invalid_value(field, "not finite"));
    }
    Ok(x)
}

fn json_integer(field: &str, v: &Json) -> Result<u64, ConfigError> {
    if let Some(n) = v.as_u64() {
        return Ok(n);
    }
    let x = json_number(field, v)?;
    if x.fract() != 0.0 || !(0.0..MAX_EXACT_INT).contains(&x) {
        return Err(invalid_value(field, format!("expected a non-negative integer, got {v}")));
    }
    Ok(x as u64)
}

fn real_field(attr: Attribute, v: &Json) -> Result<f64, ConfigError> {
    let x = json_number(attr.key(), v)?;
    check_real(attr, x)?;
    Ok(x)
}

fn integer_field(attr: Attribute, v: &Json) -> Result<u64, ConfigError> {
    let n = json_integer(attr.key(), v)?;
    check_integer(attr, n)?;
    Ok(n)
}

fn milestones_field(v: &Json) -> Result<Vec<u64>, ConfigError> {
    let field = Attribute::StepSize.key();
    let steps = match v {
        Json::Array(items) => items
            .iter()
            .map(|item| json_integer(field, item))
            .collect::<Result<Vec<_>, _>>()?,
        other => vec![json_integer(field, other)?],
    };
    check_milestones(&steps)?;
    Ok(steps)
}

fn check_real(attr: Attribute, x: f64) -> Result<(), ConfigError> {
    let field = attr.key();
    if !x.is_finite() {
        return Err(invalid_value(field, "not finite"));
    }
    match attr {
        Attribute::Momentum if !(0.0..=1.0).contains(&x) => {
            Err(invalid_value(field, format!("{x} is outside [0, 1]")))
        }
        Attribute::LearningRate | Attribute::Gamma if x <= 0.0 => {
            Err(invalid_value(field, format!("{x} must be positive")))
        }
        _ => Ok(()),
    }
}

fn check_integer(attr: Attribute, n: u64) -> Result<(), ConfigError> {
    if n == 0 {
        return Err(invalid_value(attr.key(), "must be at least 1"));
    }
    Ok(())
}

fn check_milestones(steps: &[u64]) -> Result<(), ConfigError> {
    let field = Attribute::StepSize.key();
    if steps.is_empty() {
        return Err(invalid_value(field, "milestone list is empty"));
    }
    if steps.contains(&0) {
        return Err(invalid_value(field, "milestones must be at least 1"));
    }
    if steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid_value(field, "milestones must be strictly increasing"));
    }
    Ok(())
}

/// A literal value inside a `fixed` or `choice` domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    List(Vec<u64>),
}

impl Value {
    /// Milestone view: a number `n` becomes `[n]`.
    pub fn as_milestones(&self) -> Option<Vec<u64>> {
        match self {
            Value::Number(x) if x.fract() == 0.0 && *x >= 0.0 => Some(vec![*x as u64]),
            Value::Number(_) => None,
            Value::List(l) => Some(l.clone()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::List(_) => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Number(x) => serialize_real(x, s),
            Value::List(l) => l.serialize(s),
        }
    }
}

/// Where the optimizer may sample one attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Fixed {
        value: Value,
    },
    Uniform {
        #[serde(serialize_with = "serialize_real")]
        lo: f64,
        #[serde(serialize_with = "serialize_real")]
        hi: f64,
    },
    /// `10^u` with `u` uniform in `[lo_exp, hi_exp)`.
    LogUniform {
        #[serde(serialize_with = "serialize_real")]
        lo_exp: f64,
        #[serde(serialize_with = "serialize_real")]
        hi_exp: f64,
    },
    UniformInt {
        lo: i64,
        hi: i64,
    },
    Choice {
        values: Vec<Value>,
    },
}

impl Domain {
    pub fn is_fixed(&self) -> bool {
        matches!(self, Domain::Fixed { .. })
    }

    fn type_name(&self) -> &'static str {
        match self {
            Domain::Fixed { .. } => "fixed",
            Domain::Uniform { .. } => "uniform",
            Domain::LogUniform { .. } => "loguniform",
            Domain::UniformInt { .. } => "uniformint",
            Domain::Choice { .. } => "choice",
        }
    }
}

/// Per-attribute domains plus the trial budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub learning_rate: Domain,
    pub momentum: Domain,
    pub batch_size: Domain,
    pub num_epochs: Domain,
    pub gamma: Domain,
    pub step_size: Domain,
    pub trials: u64,
    pub epochs_per_trial: u64,
}

impl SearchSpace {
    pub fn domain(&self, attr: Attribute) -> &Domain {
        match attr {
            Attribute::LearningRate => &self.learning_rate,
            Attribute::Momentum => &self.momentum,
            Attribute::BatchSize => &self.batch_size,
            Attribute::NumEpochs => &self.num_epochs,
            Attribute::Gamma => &self.gamma,
            Attribute::StepSize => &self.step_size,
        }
    }

    /// A space in which every attribute is pinned to `config`.
    pub fn fixed(config: &HyperparameterConfig, trials: u64) -> SearchSpace {
        let num = |x: f64| Domain::Fixed {
            value: Value::Number(x),
        };
        SearchSpace {
            learning_rate: num(config.learning_rate),
            momentum: num(config.momentum),
            batch_size: num(config.batch_size as f64),
            num_epochs: num(config.num_epochs as f64),
            gamma: num(config.gamma),
            step_size: Domain::Fixed {
                value: Value::List(config.step_size.clone()),
            },
            trials,
            epochs_per_trial: config.num_epochs,
        }
    }

    /// True when no attribute has anything left to sample.
    pub fn is_all_fixed(&self) -> bool {
        Attribute::ALL.iter().all(|&a| self.domain(a).is_fixed())
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serialization is infallible")
    }

    pub fn from_json_value(value: &Json) -> Result<Parsed<Self>, ConfigError> {
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError::Json("expected a JSON object".into()))?;
        let mut warnings = Vec::new();
        for key in obj.keys() {
            let known = Attribute::ALL.iter().any(|a| a.key() == key)
                || key == "trials"
                || key == "epochs_per_trial";
            if !known {
                warnings.push(Warning::UnknownField(key.clone()));
            }
        }
        let mut domain = |attr: Attribute| -> Result<Domain, ConfigError> {
            let v = obj
                .get(attr.key())
                .ok_or_else(|| ConfigError::MissingField(attr.key().to_owned()))?;
            parse_domain(attr, v, &mut warnings)
        };
        let learning_rate = domain(Attribute::LearningRate)?;
        let momentum = domain(Attribute::Momentum)?;
        let batch_size = domain(Attribute::BatchSize)?;
        let num_epochs = domain(Attribute::NumEpochs)?;
        let gamma = domain(Attribute::Gamma)?;
        let step_size = domain(Attribute::StepSize)?;
        let budget = |key: &str| -> Result<u64, ConfigError> {
            let v = obj
                .get(key)
                .ok_or_else(|| ConfigError::MissingField(key.to_owned()))?;
            let n = json_integer(key, v)?;
            if n == 0 {
                return Err(invalid_value(key, "must be at least 1"));
            }
            Ok(n)
        };
        let space = SearchSpace {
            learning_rate,
            momentum,
            batch_size,
            num_epochs,
            gamma,
            step_size,
            trials: budget("trials")?,
            epochs_per_trial: budget("epochs_per_trial")?,
        };
        if let Domain::Fixed {
            value: Value::Number(e),
        } = &space.num_epochs
        {
            if *e != space.epochs_per_trial as f64 {
                return Err(invalid_domain(
                    "num_epochs",
                    format!(
                        "fixed value {e} disagrees with epochs_per_trial {}",
                        space.epochs_per_trial
                    ),
                ));
            }
        }
        Ok(Parsed {
            value: space,
            warnings,
        })
    }
}

/// Parses and validates a search-space document.
pub fn parse_search_space(text: &str) -> Result<Parsed<SearchSpace>, ConfigError> {
    let value: Json = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    SearchSpace::from_json_value(&value)
}

fn domain_number(field: &str, obj: &Map<String, Json>, key: &str) -> Result<f64, ConfigError> {
    let v = obj
        .get(key)
        .ok_or_else(|| invalid_domain(field, format!("missing `{key}`")))?;
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid_domain(field, format!("`{key}` must be a finite number")))
}

fn domain_integer(field: &str, obj: &Map<String, Json>, key: &str) -> Result<i64, ConfigError> {
    let x = domain_number(field, obj, key)?;
    if x.fract() != 0.0 || x.abs() >= MAX_EXACT_INT {
        return Err(invalid_domain(field, format!("`{key}` must be an integer")));
    }
    Ok(x as i64)
}

fn parse_literal(attr: Attribute, v: &Json) -> Result<Value, ConfigError> {
    let field = attr.key();
    let wrap = |e: ConfigError| match e {
        ConfigError::InvalidValue { reason, .. } => invalid_domain(field, reason),
        other => other,
    };
    match attr.kind() {
        AttributeKind::Real => Ok(Value::Number(real_field(attr, v).map_err(wrap)?)),
        AttributeKind::Integer => Ok(Value::Number(integer_field(attr, v).map_err(wrap)? as f64)),
        AttributeKind::Milestones => match v {
            Json::Array(_) => Ok(Value::List(milestones_field(v).map_err(wrap)?)),
            _ => {
                let n = json_integer(field, v).map_err(wrap)?;
                check_milestones(&[n]).map_err(wrap)?;
                Ok(Value::Number(n as f64))
            }
        },
    }
}

fn parse_domain(
    attr: Attribute,
    v: &Json,
    warnings: &mut Vec<Warning>,
) -> Result<Domain, ConfigError> {
    let field = attr.key();
    let obj = v
        .as_object()
        .ok_or_else(|| invalid_domain(field, "expected an object with a `type`"))?;
    let ty = obj
        .get("type")
        .and_then(Json::as_str)
        .ok_or_else(|| invalid_domain(field, "missing string `type`"))?;
    let allowed: &[&str] = match ty {
        "fixed" => &["value"],
        "uniform" | "uniformint" => &["lo", "hi"],
        "loguniform" => &["lo_exp", "hi_exp"],
        "choice" => &["values"],
        other => return Err(invalid_domain(field, format!("unknown domain type `{other}`"))),
    };
    for key in obj.keys() {
        if key != "type" && !allowed.contains(&key.as_str()) {
            warnings.push(Warning::UnknownField(format!("{field}.{key}")));
        }
    }
    let kind = attr.kind();
    let domain = match ty {
        "fixed" => {
            let value = obj
                .get("value")
                .ok_or_else(|| invalid_domain(field, "missing `value`"))?;
            Domain::Fixed {
                value: parse_literal(attr, value)?,
            }
        }
        "uniform" => {
            let lo = domain_number(field, obj, "lo")?;
            let hi = domain_number(field, obj, "hi")?;
            Domain::Uniform { lo, hi }
        }
        "loguniform" => {
            let lo_exp = domain_number(field, obj, "lo_exp")?;
            let hi_exp = domain_number(field, obj, "hi_exp")?;
            Domain::LogUniform { lo_exp, hi_exp }
        }
        "uniformint" => {
            let lo = domain_integer(field, obj, "lo")?;
            let hi = domain_integer(field, obj, "hi")?;
            Domain::UniformInt { lo, hi }
        }
        _ => {
            let values = obj
                .get("values")
                .and_then(Json::as_array)
                .ok_or_else(|| invalid_domain(field, "`values` must be an array"))?;
            if values.is_empty() {
                return Err(invalid_domain(field, "`values` is empty"));
            }
            let values = values
                .iter()
                .map(|v| parse_literal(attr, v))
                .collect::<Result<Vec<_>, _>>()?;
            for (i, a) in values.iter().enumerate() {
                if values[..i].iter().any(|b| b == a) {
                    return Err(invalid_domain(field, "`values` are not pairwise distinct"));
                }
            }
            Domain::Choice { values }
        }
    };
    check_domain(attr, kind, domain)
}

/// Checks that a domain suits the attribute kind and stays inside the
/// attribute's validity range.
fn check_domain(attr: Attribute, kind: AttributeKind, domain: Domain) -> Result<Domain, ConfigError> {
    let field = attr.key();
    let wrong_kind = || {
        invalid_domain(
            field,
            format!("`{}` domains are not allowed for this attribute", domain.type_name()),
        )
    };
    match &domain {
        Domain::Uniform { lo, hi } => {
            if kind != AttributeKind::Real {
                return Err(wrong_kind());
            }
            if lo >= hi {
                return Err(ConfigError::RangeOrder {
                    field: field.to_owned(),
                    lo: *lo,
                    hi: *hi,
                });
            }
            let ok = match attr {
                Attribute::Momentum => *lo >= 0.0 && *hi <= 1.0,
                _ => *lo > 0.0,
            };
            if !ok {
                return Err(invalid_domain(field, "range leaves the valid values of the attribute"));
            }
        }
        Domain::LogUniform { lo_exp, hi_exp } => {
            if kind != AttributeKind::Real {
                return Err(wrong_kind());
            }
            if lo_exp >= hi_exp {
                return Err(ConfigError::RangeOrder {
                    field: field.to_owned(),
                    lo: *lo_exp,
                    hi: *hi_exp,
                });
            }
            if lo_exp.abs() > MAX_EXPONENT || hi_exp.abs() > MAX_EXPONENT {
                return Err(invalid_domain(field, "exponent bound out of floating-point range"));
            }
            if attr == Attribute::Momentum && *hi_exp > 0.0 {
                return Err(invalid_domain(field, "momentum exponents must not exceed 0"));
            }
        }
        Domain::UniformInt { lo, hi } => {
            if kind == AttributeKind::Real {
                return Err(wrong_kind());
            }
            if lo > hi {
                return Err(ConfigError::RangeOrder {
                    field: field.to_owned(),
                    lo: *lo as f64,
                    hi: *hi as f64,
                });
            }
            if *lo < 1 {
                return Err(invalid_domain(field, "integer range must start at 1 or above"));
            }
            if lo == hi {
                return Ok(Domain::Fixed {
                    value: Value::Number(*lo as f64),
                });
            }
        }
        Domain::Fixed { .. } | Domain::Choice { .. } => {}
    }
    Ok(domain)
}

fn real_in(domain: &Domain, x: f64) -> bool {
    match domain {
        Domain::Fixed { value } => value.as_number() == Some(x),
        Domain::Uniform { lo, hi } => *lo <= x && x <= *hi,
        Domain::LogUniform { lo_exp, hi_exp } => {
            if x <= 0.0 {
                return false;
            }
            let e = x.log10();
            *lo_exp - LOG_BOUND_SLACK <= e && e <= *hi_exp + LOG_BOUND_SLACK
        }
        Domain::UniformInt { lo, hi } => x.fract() == 0.0 && (*lo as f64) <= x && x <= (*hi as f64),
        Domain::Choice { values } => values.iter().any(|v| v.as_number() == Some(x)),
    }
}

fn milestones_in(domain: &Domain, steps: &[u64]) -> bool {
    match domain {
        Domain::Fixed { value } => value.as_milestones().as_deref() == Some(steps),
        Domain::UniformInt { lo, hi } => steps.iter().all(|&s| (*lo as f64) <= s as f64 && s as f64 <= *hi as f64),
        Domain::Choice { values } => {
            values.iter().any(|v| v.as_milestones().as_deref() == Some(steps))
                || steps
                    .iter()
                    .all(|&s| values.iter().any(|v| v.as_number() == Some(s as f64)))
        }
        Domain::Uniform { .. } | Domain::LogUniform { .. } => {
            steps.iter().all(|&s| real_in(domain, s as f64))
        }
    }
}

/// True iff every attribute of `config` lies in its domain.
pub fn space_contains(space: &SearchSpace, config: &HyperparameterConfig) -> bool {
    real_in(&space.learning_rate, config.learning_rate)
        && real_in(&space.momentum, config.momentum)
        && real_in(&space.batch_size, config.batch_size as f64)
        && real_in(&space.num_epochs, config.num_epochs as f64)
        && real_in(&space.gamma, config.gamma)
        && milestones_in(&space.step_size, &config.step_size)
}
