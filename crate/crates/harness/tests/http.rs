//! The HTTP client against a local mock endpoint.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anabench_core::model::{CompletionRequest, ModelClient, ModelError};
use anabench_harness::{HttpClient, RetryPolicy};

/// Serve `responses` in order, one per connection, recording request bodies.
fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let seen = bodies.clone();
    std::thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            seen.lock().unwrap().push(String::from_utf8(buf).unwrap());
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1"), bodies)
}

fn fast() -> RetryPolicy {
    RetryPolicy { max_attempts: 5, base_delay: Duration::from_millis(5) }
}

const OK: &str = r#"{"choices":[{"text":"9]","logprobs":{"tokens":["9","]"],"token_logprobs":[-0.1,-0.2],"text_offset":[0,1]}}]}"#;

#[test]
fn transient_failures_are_retried() {
    let (url, bodies) = serve(vec![(503, "busy".into()), (429, "slow down".into()), (200, OK.into())]);
    let c = HttpClient::new(&url, "m", Some("k".into())).unwrap().with_retry(fast());
    let out = c.complete(&CompletionRequest::generate("[1] [", 10)).unwrap();
    assert_eq!(out.text, "9]");
    assert_eq!(out.completion_tokens.len(), 2);
    let bodies = bodies.lock().unwrap();
    assert_eq!(bodies.len(), 3);
    let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(sent["temperature"], 0.0);
    assert_eq!(sent["max_tokens"], 10);
    assert_eq!(sent["echo"], false);
}

#[test]
fn retries_give_up_after_five_attempts() {
    let (url, bodies) = serve((0..5).map(|_| (500, "down".to_string())).collect());
    let c = HttpClient::new(&url, "m", None).unwrap().with_retry(fast());
    let err = c.complete(&CompletionRequest::generate("x", 1)).unwrap_err();
    assert!(matches!(err, ModelError::RetriesExhausted { attempts: 5, .. }), "{err}");
    assert_eq!(bodies.lock().unwrap().len(), 5);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, bodies) = serve(vec![(401, "no".into())]);
    let c = HttpClient::new(&url, "m", None).unwrap().with_retry(fast());
    assert!(matches!(c.complete(&CompletionRequest::generate("x", 1)), Err(ModelError::Api { status: 401, .. })));
    assert_eq!(bodies.lock().unwrap().len(), 1);
}
