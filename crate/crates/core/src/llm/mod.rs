//! Chat-completion client: transports, reply parsing and batch sampling.

mod extract;
mod sampling;
mod transport;

pub use extract::extract_json_block;
pub use sampling::{collect_samples, FailureStage, ParseFailure, Sample, SampleBatch, SampleOptions};
pub use transport::{
    assistant_content, fixture_name, HttpTransport, RecordTransport, ReplayTransport, Transport,
    API_KEY_ENV, API_URL_ENV,
};

use crate::prompting::Message;
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_MODEL: &str = "gpt-4";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("no API key: set {}", API_KEY_ENV)]
    AuthMissing,
    #[error("no endpoint: set {}", API_URL_ENV)]
    EndpointUnset,
    #[error("endpoint answered with HTTP {status}")]
    EndpointError { status: u16 },
    #[error("network failure: {0}")]
    Network(String),
    #[error("replay fixture {index} requested but only {available} exist")]
    ReplayExhausted { index: usize, available: usize },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed sample batch: {0}")]
    MalformedBatch(String),
}

impl LlmError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> LlmError {
        LlmError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Errors that make every further request pointless.
    pub fn is_fatal(&self) -> bool {
        matches!(
            self,
            LlmError::AuthMissing | LlmError::EndpointUnset | LlmError::InvalidRequest(_)
        )
    }

    pub fn code(&self) -> &'static str {
        match self {
            LlmError::AuthMissing => "AuthMissing",
            LlmError::EndpointUnset => "EndpointUnset",
            LlmError::EndpointError { .. } => "EndpointError",
            LlmError::Network(_) => "NetworkError",
            LlmError::ReplayExhausted { .. } => "ReplayExhausted",
            LlmError::MalformedResponse(_) => "MalformedResponse",
            LlmError::NoJsonFound => "NoJsonFound",
            LlmError::InvalidRequest(_) => "InvalidRequest",
            LlmError::Io { .. } => "IoFailure",
            LlmError::MalformedBatch(_) => "MalformedBatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model_name: String,
    /// Defaults to 0 for (near) deterministic decoding.
    pub temperature: f64,
    pub messages: Vec<Message>,
}

impl ChatRequest {
    pub fn new(model_name: impl Into<String>, messages: Vec<Message>) -> Self {
        ChatRequest {
            model_name: model_name.into(),
            temperature: 0.0,
            messages,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} must be a finite non-negative number",
                self.temperature
            )));
        }
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("no messages".into()));
        }
        Ok(())
    }
}
