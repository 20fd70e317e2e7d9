use llmhpo::llm::{ChatRequest, HttpTransport, LlmError, Transport};
use llmhpo::prompting::Message;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

struct Seen {
    head: String,
    body: String,
}

/// Answers one connection per canned `(status, body)` and reports what it
/// received.
fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                head.push_str(&line);
            }
            let len = head
                .lines()
                .find_map(|l| {
                    let (k, v) = l.split_once(':')?;
                    k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse::<usize>().unwrap())
                })
                .unwrap_or(0);
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            tx.send(Seen {
                head,
                body: String::from_utf8(buf).unwrap(),
            })
            .unwrap();
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn completion(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn request() -> ChatRequest {
    ChatRequest::new(
        "gpt-4",
        vec![Message::system("You are an expert."), Message::user("Suggest hyperparameters.")],
    )
}

#[test]
fn retries_rate_limit_then_succeeds() {
    let (url, rx) = serve(vec![(429, "{}".into()), (200, completion("{\"a\": 1}"))]);
    let transport = HttpTransport::new(Some(url), Some("sk-test".into()))
        .unwrap()
        .with_backoff(vec![Duration::from_millis(10)]);
    assert_eq!(transport.send(&request()).unwrap(), "{\"a\": 1}");

    let first = rx.recv().unwrap();
    let second = rx.recv().unwrap();
    assert!(first.head.starts_with("POST /v1/chat/completions "));
    assert!(first
        .head
        .lines()
        .any(|l| l.eq_ignore_ascii_case("authorization: Bearer sk-test")));
    let body: serde_json::Value = serde_json::from_str(&second.body).unwrap();
    assert_eq!(body["model"], "gpt-4");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "Suggest hyperparameters.");
}

#[test]
fn gives_up_after_backoff_schedule() {
    let (url, _rx) = serve(vec![(503, "{}".into()), (503, "{}".into())]);
    let transport = HttpTransport::new(Some(url), Some("k".into()))
        .unwrap()
        .with_backoff(vec![Duration::from_millis(5)]);
    assert_eq!(
        transport.send(&request()),
        Err(LlmError::EndpointError { status: 503 })
    );
}

#[test]
fn client_errors_are_not_retried() {
    let (url, rx) = serve(vec![(401, "{}".into())]);
    let transport = HttpTransport::new(Some(url), Some("k".into()))
        .unwrap()
        .with_backoff(vec![Duration::from_millis(5); 3]);
    assert_eq!(
        transport.send(&request()),
        Err(LlmError::EndpointError { status: 401 })
    );
    assert!(rx.recv().is_ok());
    assert!(rx.recv_timeout(Duration::from_millis(100)).is_err());
}

#[test]
fn malformed_body_is_reported() {
    let (url, _rx) = serve(vec![(200, "{\"choices\": []}".into())]);
    let transport = HttpTransport::new(Some(url), Some("k".into())).unwrap();
    assert!(matches!(
        transport.send(&request()),
        Err(LlmError::MalformedResponse(_))
    ));
}

#[test]
fn configuration_errors() {
    assert_eq!(
        HttpTransport::new(Some("http://localhost".into()), None).unwrap_err(),
        LlmError::AuthMissing
    );
    assert_eq!(
        HttpTransport::new(Some("http://localhost".into()), Some("  ".into())).unwrap_err(),
        LlmError::AuthMissing
    );
    assert_eq!(
        HttpTransport::new(None, Some("k".into())).unwrap_err(),
        LlmError::EndpointUnset
    );
    let t = HttpTransport::new(Some("http://host/v1/".into()), Some("k".into())).unwrap();
    assert_eq!(t.endpoint(), "http://host/v1/chat/completions");
}
