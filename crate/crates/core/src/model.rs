//! The completion-endpoint contract shared by real and scripted models.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature used by every protocol.
pub const TEMPERATURE: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    /// Return prompt tokens with their log probabilities.
    pub echo: bool,
}

impl CompletionRequest {
    /// Free generation after the prompt.
    pub fn generate(prompt: impl Into<String>, max_tokens: u32) -> Self {
        CompletionRequest { prompt: prompt.into(), max_tokens, temperature: TEMPERATURE, echo: false }
    }

    /// Score the prompt itself; nothing is generated.
    pub fn score(prompt: impl Into<String>) -> Self {
        CompletionRequest { prompt: prompt.into(), max_tokens: 0, temperature: TEMPERATURE, echo: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// `None` for the first prompt token, which has no conditional probability.
    pub logprob: Option<f64>,
    /// Byte offset of the token in the prompt (prompt tokens) or the
    /// completion text (completion tokens).
    pub offset: usize,
}

impl Token {
    pub fn span(&self) -> Range<usize> {
        self.offset..self.offset + self.text.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Filled when the request asked for echo.
    pub prompt_tokens: Vec<Token>,
    pub completion_tokens: Vec<Token>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("prompt of {tokens} tokens does not fit a {window}-token window")]
    ContextOverflow { tokens: usize, window: usize },
    #[error("{0}")]
    Scripted(String),
}

impl ModelError {
    /// Worth retrying: transport failures, rate limits and server errors.
    pub fn is_transient(&self) -> bool {
        match self {
            ModelError::Transport(_) => true,
            ModelError::Api { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// A text-completion endpoint with token log probabilities.
pub trait ModelClient: Send + Sync {
    /// Identity recorded with every result.
    fn id(&self) -> &str;

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError>;

    /// Tokens of `text` as the endpoint counts them.
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        Ok(self.complete(&CompletionRequest::score(text))?.prompt_tokens)
    }
}

impl<T: ModelClient + ?Sized> ModelClient for Box<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        (**self).complete(request)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        (**self).tokenize(text)
    }
}

impl<T: ModelClient + ?Sized> ModelClient for std::sync::Arc<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        (**self).complete(request)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        (**self).tokenize(text)
    }
}

/// Bracket tokens never count toward a choice score.
fn is_bracket(text: &str) -> bool {
    matches!(text.trim(), "[" | "]")
}

/// Mean log probability of the prompt tokens overlapping any of `spans`.
///
/// Returns `None` when no scored token overlaps.
pub fn mean_logprob(tokens: &[Token], spans: &[Range<usize>]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in tokens {
        let span = t.span();
        let overlaps = spans.iter().any(|s| span.start < s.end && s.start < span.end);
        if overlaps && !is_bracket(&t.text) {
            if let Some(lp) = t.logprob {
                sum += lp;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Index of the highest score; ties go to the lowest index. The flag is
/// true when the maximum was shared.
pub fn argmax_lowest(scores: &[f64]) -> Option<(usize, bool)> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some(b) if s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    let b = best?;
    let tied = scores.iter().enumerate().any(|(i, &s)| i != b && s == scores[b]);
    Some((b, tied))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str, offset: usize, lp: f64) -> Token {
        Token { text: text.into(), logprob: Some(lp), offset }
    }

    #[test]
    fn mean_over_span_skips_brackets() {
        // "[1] [8 2"  +  "]"
        let toks = vec![tok("[", 0, -9.0), tok("8", 1, -1.0), tok(" 2", 2, -3.0), tok("]", 4, -7.0)];
        assert_eq!(mean_logprob(&toks, &[1..4]), Some(-2.0));
        assert_eq!(mean_logprob(&toks, &[10..12]), None);
    }

    #[test]
    fn argmax_ties() {
        assert_eq!(argmax_lowest(&[-1.0, -1.0, -2.0]), Some((0, true)));
        assert_eq!(argmax_lowest(&[-3.0, -1.0, -2.0]), Some((1, false)));
        assert_eq!(argmax_lowest(&[]), None);
    }
}
