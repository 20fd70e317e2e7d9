use super::{extract_json_block, ChatRequest, LlmError, Transport, DEFAULT_MODEL};
use crate::config::{parse_config, HyperparameterConfig};
use crate::prompting::{render_usecase_prompt, Message, PromptSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureStage {
    /// The request itself failed (after retries).
    Transport,
    /// No JSON object in the reply.
    Extract,
    /// JSON found but not a valid configuration.
    Parse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub stage: FailureStage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub raw: String,
    pub outcome: Result<HyperparameterConfig, ParseFailure>,
    pub warnings: Vec<String>,
}

impl Sample {
    pub fn config(&self) -> Option<&HyperparameterConfig> {
        self.outcome.as_ref().ok()
    }

    fn from_reply(index: usize, reply: Result<String, LlmError>) -> Sample {
        let raw = match reply {
            Ok(raw) => raw,
            Err(e) => {
                return Sample {
                    index,
                    raw: String::new(),
                    outcome: Err(ParseFailure {
                        stage: FailureStage::Transport,
                        message: e.to_string(),
                    }),
                    warnings: Vec::new(),
                }
            }
        };
        let (outcome, warnings) = match extract_json_block(&raw) {
            Err(e) => (
                Err(ParseFailure {
                    stage: FailureStage::Extract,
                    message: e.to_string(),
                }),
                Vec::new(),
            ),
            Ok(block) => match parse_config(&block) {
                Ok(parsed) => (
                    Ok(parsed.value),
                    parsed.warnings.iter().map(ToString::to_string).collect(),
                ),
                Err(e) => (
                    Err(ParseFailure {
                        stage: FailureStage::Parse,
                        message: e.to_string(),
                    }),
                    Vec::new(),
                ),
            },
        };
        Sample {
            index,
            raw,
            outcome,
            warnings,
        }
    }
}

/// Replies to `n` independent single-turn conversations, indexed by
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub model_name: String,
    pub temperature: f64,
    /// The conversation sent on every iteration.
    pub messages: Vec<Message>,
    pub samples: Vec<Sample>,
}

impl SampleBatch {
    pub fn configs(&self) -> Vec<&HyperparameterConfig> {
        self.samples.iter().filter_map(Sample::config).collect()
    }

    pub fn failure_count(&self) -> usize {
        self.samples.iter().filter(|s| s.outcome.is_err()).count()
    }

    /// All message contents joined, as used for prompt-token diversity.
    pub fn prompt_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// One header line followed by one line per sample.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = json!({
            "kind": "header",
            "model": self.model_name,
            "temperature": self.temperature,
            "messages": self.messages,
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for s in &self.samples {
            let (config, error) = match &s.outcome {
                Ok(c) => (serde_json::to_value(c).expect("config serializes"), Value::Null),
                Err(f) => (Value::Null, serde_json::to_value(f).expect("failure serializes")),
            };
            let line = json!({
                "kind": "sample",
                "index": s.index,
                "raw": s.raw,
                "config": config,
                "error": error,
                "warnings": s.warnings,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<SampleBatch, LlmError> {
        let bad = |line: usize, msg: &str| LlmError::MalformedBatch(format!("line {}: {msg}", line + 1));
        let mut header: Option<(String, f64, Vec<Message>)> = None;
        let mut samples = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(line).map_err(|e| bad(ln, &e.to_string()))?;
            match v.get("kind").and_then(Value::as_str) {
                Some("header") => {
                    let model = v["model"].as_str().unwrap_or(DEFAULT_MODEL).to_owned();
                    let temperature = v["temperature"].as_f64().unwrap_or(0.0);
                    let messages: Vec<Message> = serde_json::from_value(v["messages"].clone())
                        .map_err(|e| bad(ln, &e.to_string()))?;
                    header = Some((model, temperature, messages));
                }
                Some("sample") => {
                    let index = v["index"]
                        .as_u64()
                        .ok_or_else(|| bad(ln, "missing index"))? as usize;
                    let raw = v["raw"].as_str().unwrap_or_default().to_owned();
                    let warnings = v["warnings"]
                        .as_array()
                        .map(|a| a.iter().filter_map(|w| w.as_str().map(str::to_owned)).collect())
                        .unwrap_or_default();
                    let outcome = if v["config"].is_null() {
                        let failure: ParseFailure = serde_json::from_value(v["error"].clone())
                            .map_err(|e| bad(ln, &e.to_string()))?;
                        Err(failure)
                    } else {
                        let parsed = HyperparameterConfig::from_json_value(&v["config"])
                            .map_err(|e| bad(ln, &e.to_string()))?;
                        Ok(parsed.value)
                    };
                    samples.push(Sample {
                        index,
                        raw,
                        outcome,
                        warnings,
                    });
                }
                _ => return Err(bad(ln, "expected kind `header` or `sample`")),
            }
        }
        samples.sort_by_key(|s| s.index);
        for (expected, s) in samples.iter().enumerate() {
            if s.index != expected {
                return Err(LlmError::MalformedBatch(format!(
                    "sample indices must be 0..n-1 exactly once; found {} at position {expected}",
                    s.index
                )));
            }
        }
        let (model_name, temperature, messages) = header.unwrap_or_else(|| (DEFAULT_MODEL.to_owned(), 0.0, Vec::new()));
        Ok(SampleBatch {
            model_name,
            temperature,
            messages,
            samples,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SampleOptions {
    pub model_name: String,
    pub temperature: f64,
    /// Maximum in-flight requests.
    pub parallel: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            model_name: DEFAULT_MODEL.to_owned(),
            temperature: 0.0,
            parallel: 1,
        }
    }
}

/// Runs `n` fresh single-turn conversations for `spec`.
///
/// Per-iteration failures are recorded in the batch; only fatal transport
/// errors (missing credentials, invalid request) abort.
pub fn collect_samples(
    transport: &dyn Transport,
    spec: &PromptSpec,
    n: usize,
    options: &SampleOptions,
) -> Result<SampleBatch, LlmError> {
    if n == 0 {
        return Err(LlmError::InvalidRequest("sample count must be at least 1".into()));
    }
    let messages =
        render_usecase_prompt(spec).map_err(|e| LlmError::InvalidRequest(e.to_string()))?;
    let request = ChatRequest::new(options.model_name.clone(), messages.clone())
        .with_temperature(options.temperature);
    request.validate()?;

    let workers = options.parallel.clamp(1, n);
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let fatal: Mutex<Option<LlmError>> = Mutex::new(None);
    let slots: Mutex<Vec<Option<Sample>>> = Mutex::new(vec![None; n]);

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= n {
                    break;
                }
                let reply = transport.send_at(index, &request);
                if let Err(e) = &reply {
                    if e.is_fatal() {
                        stop.store(true, Ordering::SeqCst);
                        fatal.lock().expect("fatal slot poisoned").get_or_insert(e.clone());
                        break;
                    }
                }
                let sample = Sample::from_reply(index, reply);
                slots.lock().expect("sample slots poisoned")[index] = Some(sample);
            });
        }
    });

    if let Some(e) = fatal.into_inner().expect("fatal slot poisoned") {
        return Err(e);
    }
    let samples = slots
        .into_inner()
        .expect("sample slots poisoned")
        .into_iter()
        .map(|s| s.expect("every index is filled when no fatal error occurred"))
        .collect();
    Ok(SampleBatch {
        model_name: options.model_name.clone(),
        temperature: options.temperature,
        messages,
        samples,
    })
}
