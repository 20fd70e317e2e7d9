use super::{ChatRequest, LlmError};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

pub const API_KEY_ENV: &str = "LLMHPO_API_KEY";
pub const API_URL_ENV: &str = "LLMHPO_API_URL";

/// Something that turns a chat request into the assistant's reply text.
///
/// Implementations must tolerate concurrent calls.
pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError>;

    /// Sends the request for a known iteration of a batch. Transports backed
    /// by stored responses use the index to keep batches ordered when
    /// requests run concurrently.
    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        let _ = iteration;
        self.send(request)
    }
}

impl<T: Transport + ?Sized> Transport for &T {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send(request)
    }

    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send_at(iteration, request)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send(request)
    }

    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).send_at(iteration, request)
    }
}

/// File name of the `index`-th stored response.
pub fn fixture_name(index: usize) -> String {
    format!("response_{index:04}.txt")
}

fn is_fixture_name(name: &str) -> bool {
    name.strip_prefix("response_")
        .and_then(|rest| rest.strip_suffix(".txt"))
        .is_some_and(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
}

/// Chat-completions endpoint over HTTP with bearer authentication.
#[derive(Debug)]
pub struct HttpTransport {
    endpoint: String,
    api_key: String,
    backoff: Vec<Duration>,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    /// Fails with `AuthMissing` before touching the network when no key is
    /// given.
    pub fn new(base_url: Option<String>, api_key: Option<String>) -> Result<Self, LlmError> {
        let api_key = api_key
            .filter(|k| !k.trim().is_empty())
            .ok_or(LlmError::AuthMissing)?;
        let base_url = base_url
            .filter(|u| !u.trim().is_empty())
            .ok_or(LlmError::EndpointUnset)?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| LlmError::Network(e.to_string()))?;
        Ok(HttpTransport {
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
            backoff: vec![
                Duration::from_secs(1),
                Duration::from_secs(2),
                Duration::from_secs(4),
            ],
            client,
        })
    }

    /// Reads the key and base URL from `LLMHPO_API_KEY` / `LLMHPO_API_URL`.
    pub fn from_env() -> Result<Self, LlmError> {
        HttpTransport::new(
            std::env::var(API_URL_ENV).ok(),
            std::env::var(API_KEY_ENV).ok(),
        )
    }

    /// Replaces the retry delays; one retry per entry.
    pub fn with_backoff(mut self, backoff: Vec<Duration>) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, Attempt> {
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| Attempt::Transient(LlmError::Network(e.to_string())))?;
        let status = response.status().as_u16();
        let text = response
            .text()
            .map_err(|e| Attempt::Transient(LlmError::Network(e.to_string())))?;
        if status == 429 || (500..600).contains(&status) {
            return Err(Attempt::Transient(LlmError::EndpointError { status }));
        }
        if !(200..300).contains(&status) {
            return Err(Attempt::Fatal(LlmError::EndpointError { status }));
        }
        assistant_content(&text).map_err(Attempt::Fatal)
    }
}

enum Attempt {
    Transient(LlmError),
    Fatal(LlmError),
}

/// Pulls `choices[0].message.content` out of a completions response body.
pub fn assistant_content(body: &str) -> Result<String, LlmError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| LlmError::MalformedResponse(format!("response is not JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(serde_json::Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| LlmError::MalformedResponse("missing choices[0].message.content".into()))
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        let body = json!({
            "model": request.model_name,
            "temperature": request.temperature,
            "messages": request.messages,
        });
        let mut delays = self.backoff.iter();
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Transient(e)) => match delays.next() {
                    Some(delay) => thread::sleep(*delay),
                    None => return Err(e),
                },
            }
        }
    }
}

/// Serves stored responses; fixture `k` answers the `k`-th call.
#[derive(Debug)]
pub struct ReplayTransport {
    fixtures: Vec<String>,
    cursor: Mutex<usize>,
}

impl ReplayTransport {
    pub fn new(fixtures: Vec<String>) -> Self {
        ReplayTransport {
            fixtures,
            cursor: Mutex::new(0),
        }
    }

    /// Loads every `response_NNNN.txt` in `dir`, in lexicographic order.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, LlmError> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|e| LlmError::io(dir, e))?;
        let mut names = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| LlmError::io(dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if is_fixture_name(&name) {
                names.push(name);
            }
        }
        names.sort();
        let fixtures = names
            .iter()
            .map(|name| {
                let path = dir.join(name);
                fs::read_to_string(&path).map_err(|e| LlmError::io(&path, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ReplayTransport::new(fixtures))
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    fn fixture(&self, index: usize) -> Result<String, LlmError> {
        self.fixtures
            .get(index)
            .cloned()
            .ok_or(LlmError::ReplayExhausted {
                index,
                available: self.fixtures.len(),
            })
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        let mut cursor = self.cursor.lock().expect("replay cursor poisoned");
        let reply = self.fixture(*cursor)?;
        *cursor += 1;
        Ok(reply)
    }

    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        self.fixture(iteration)
    }
}

/// Forwards to another transport and stores every reply as a fixture, so a
/// later [`ReplayTransport`] over the same directory reproduces the run.
#[derive(Debug)]
pub struct RecordTransport<T> {
    inner: T,
    dir: PathBuf,
    cursor: Mutex<usize>,
}

impl<T: Transport> RecordTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| LlmError::io(&dir, e))?;
        Ok(RecordTransport {
            inner,
            dir,
            cursor: Mutex::new(0),
        })
    }

    fn store(&self, index: usize, reply: &str) -> Result<(), LlmError> {
        let path = self.dir.join(fixture_name(index));
        fs::write(&path, reply).map_err(|e| LlmError::io(&path, e))
    }
}

impl<T: Transport> Transport for RecordTransport<T> {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut cursor = self.cursor.lock().expect("record cursor poisoned");
        let reply = self.inner.send(request)?;
        self.store(*cursor, &reply)?;
        *cursor += 1;
        Ok(reply)
    }

    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        let reply = self.inner.send_at(iteration, request)?;
        self.store(iteration, &reply)?;
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::Message;

    fn request() -> ChatRequest {
        ChatRequest::new("test-model", vec![Message::system("s"), Message::user("u")])
    }

    #[test]
    fn replay_passthrough_and_exhaustion() {
        let replay = ReplayTransport::new(vec!["ok".into(), "second".into()]);
        assert_eq!(replay.send(&request()).unwrap(), "ok");
        assert_eq!(replay.send(&request()).unwrap(), "second");
        assert_eq!(
            replay.send(&request()),
            Err(LlmError::ReplayExhausted { index: 2, available: 2 })
        );
    }

    #[test]
    fn replay_reads_fixture_dir_in_order() {
        let dir = tempfile::tempdir().unwrap();
        for (i, text) in ["zero", "one", "two"].iter().enumerate().rev() {
            fs::write(dir.path().join(fixture_name(i)), text).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let replay = ReplayTransport::from_dir(dir.path()).unwrap();
        assert_eq!(replay.len(), 3);
        assert_eq!(replay.send_at(1, &request()).unwrap(), "one");
        assert_eq!(replay.send(&request()).unwrap(), "zero");
    }

    #[test]
    fn http_without_token_fails_first() {
        assert_eq!(
            HttpTransport::new(Some("http://127.0.0.1:9".into()), None).unwrap_err(),
            LlmError::AuthMissing
        );
        assert_eq!(
            HttpTransport::new(None, None).unwrap_err(),
            LlmError::AuthMissing
        );
        assert_eq!(
            HttpTransport::new(None, Some("key".into())).unwrap_err(),
            LlmError::EndpointUnset
        );
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let source = ReplayTransport::new(vec!["a".into(), "b".into(), "c".into()]);
        let recorder = RecordTransport::new(source, dir.path()).unwrap();
        assert_eq!(recorder.send_at(2, &request()).unwrap(), "c");
        assert_eq!(recorder.send_at(0, &request()).unwrap(), "a");
        assert_eq!(recorder.send_at(1, &request()).unwrap(), "b");
        let replay = ReplayTransport::from_dir(dir.path()).unwrap();
        let replies: Vec<_> = (0..3).map(|_| replay.send(&request()).unwrap()).collect();
        assert_eq!(replies, ["a", "b", "c"]);
    }

    #[test]
    fn content_extraction() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(assistant_content(body).unwrap(), "hi");
        assert!(matches!(assistant_content("{}"), Err(LlmError::MalformedResponse(_))));
    }
}
