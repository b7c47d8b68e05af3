//! HTTP client for text-completion endpoints with token log probabilities.

use std::time::Duration;

use log::warn;
use serde::Deserialize;
use serde_json::json;

use anabench_core::model::{Completion, CompletionRequest, ModelClient, ModelError, Token};

/// Environment variable naming the endpoint base URL.
pub const ENDPOINT_ENV: &str = "ANABENCH_ENDPOINT";
/// Environment variable holding the bearer credential.
pub const API_KEY_ENV: &str = "ANABENCH_API_KEY";

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 5, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    /// Run `f` until it succeeds, fails permanently, or attempts run out.
    /// Delays double after each transient failure.
    pub fn run<T>(&self, mut f: impl FnMut() -> Result<T, ModelError>) -> Result<T, ModelError> {
        let mut delay = self.base_delay;
        let mut last = String::new();
        for attempt in 1..=self.max_attempts {
            match f() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() => {
                    warn!("attempt {attempt}/{} failed: {e}", self.max_attempts);
                    last = e.to_string();
                    if attempt < self.max_attempts {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(ModelError::RetriesExhausted { attempts: self.max_attempts, last })
    }
}

/// Client for an OpenAI-style `/completions` endpoint.
pub struct HttpClient {
    id: String,
    model: String,
    url: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
    retry: RetryPolicy,
}

#[derive(Deserialize)]
struct ApiResponse {
    choices: Vec<ApiChoice>,
}

#[derive(Deserialize)]
struct ApiChoice {
    text: String,
    logprobs: Option<ApiLogprobs>,
}

#[derive(Deserialize)]
struct ApiLogprobs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

impl HttpClient {
    pub fn new(base_url: &str, model: &str, api_key: Option<String>) -> Result<Self, ModelError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ModelError::Transport(e.to_string()))?;
        Ok(HttpClient {
            id: model.to_string(),
            model: model.to_string(),
            url: format!("{}/completions", base_url.trim_end_matches('/')),
            api_key,
            http,
            retry: RetryPolicy::default(),
        })
    }

    /// Endpoint and credential from the environment.
    pub fn from_env(model: &str) -> Result<Self, ModelError> {
        let base = std::env::var(ENDPOINT_ENV)
            .map_err(|_| ModelError::Transport(format!("{ENDPOINT_ENV} is not set")))?;
        Self::new(&base, model, std::env::var(API_KEY_ENV).ok())
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn send(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let body = json!({
            "model": self.model,
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "logprobs": 1,
            "echo": request.echo,
        });
        let mut req = self.http.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ModelError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ModelError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ModelError::Api { status: status.as_u16(), body: text });
        }
        let parsed: ApiResponse = serde_json::from_str(&text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        split_response(request, parsed)
    }
}

/// Separate echoed prompt tokens from generated ones.
fn split_response(request: &CompletionRequest, resp: ApiResponse) -> Result<Completion, ModelError> {
    let choice = resp.choices.into_iter().next().ok_or_else(|| ModelError::Malformed("no choices".into()))?;
    let prompt_len = if request.echo { request.prompt.len() } else { 0 };
    let text = if request.echo {
        choice.text.get(prompt_len..).unwrap_or_default().to_string()
    } else {
        choice.text
    };
    let mut out = Completion { text, ..Completion::default() };
    if let Some(lp) = choice.logprobs {
        if lp.tokens.len() != lp.token_logprobs.len() || lp.tokens.len() != lp.text_offset.len() {
            return Err(ModelError::Malformed("logprob arrays differ in length".into()));
        }
        for ((text, logprob), offset) in lp.tokens.into_iter().zip(lp.token_logprobs).zip(lp.text_offset) {
            if offset < prompt_len {
                out.prompt_tokens.push(Token { text, logprob, offset });
            } else {
                out.completion_tokens.push(Token { text, logprob, offset: offset - prompt_len });
            }
        }
    }
    if request.echo && out.prompt_tokens.is_empty() && !request.prompt.is_empty() {
        return Err(ModelError::Malformed("endpoint did not echo prompt tokens".into()));
    }
    Ok(out)
}

impl ModelClient for HttpClient {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        self.retry.run(|| self.send(request))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_split() {
        let req = CompletionRequest::score("a b");
        let resp: ApiResponse = serde_json::from_value(json!({
            "choices": [{"text": "a b c", "logprobs": {
                "tokens": ["a", " b", " c"], "token_logprobs": [null, -1.0, -2.0], "text_offset": [0, 1, 3]}}]
        }))
        .unwrap();
        let c = split_response(&req, resp).unwrap();
        assert_eq!(c.text, " c");
        assert_eq!(c.prompt_tokens.len(), 2);
        assert_eq!(c.completion_tokens[0].offset, 0);
    }

    #[test]
    fn retry_stops_on_permanent_error() {
        let policy = RetryPolicy { max_attempts: 5, base_delay: Duration::from_millis(1) };
        let mut calls = 0;
        let r: Result<(), _> = policy.run(|| {
            calls += 1;
            Err(ModelError::Api { status: 400, body: String::new() })
        });
        assert!(r.is_err());
        assert_eq!(calls, 1);
        let mut calls = 0;
        let r: Result<(), _> = policy.run(|| {
            calls += 1;
            Err(ModelError::Api { status: 503, body: String::new() })
        });
        assert!(matches!(r, Err(ModelError::RetriesExhausted { attempts: 5, .. })));
        assert_eq!(calls, 5);
    }
}
