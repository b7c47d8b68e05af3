//! Deterministic scripted models for tests and pipeline checks.
//!
//! Tokens are whitespace-separated pieces of the text, each carrying its
//! byte offset. Log probabilities are synthetic and depend only on the
//! strategy and the prompt.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use anabench_core::letterstring::{render_letterstring_prompt, PromptFormat};
use anabench_core::model::{Completion, CompletionRequest, ModelClient, ModelError, Token};
use anabench_core::problem_set::{mix_seed, Problem, ProblemSet};
use anabench_core::render::parse_matrix_prompt;
use anabench_core::solver::solve;
use anabench_core::answers_equivalent;

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Solves matrices with the rule-induction solver and answers
    /// registered letter-string prompts with their derived answers.
    Oracle,
    /// Random answers and random per-prompt scores.
    UniformRandom(u64),
    /// The same text for every prompt.
    FixedText(String),
    /// Exact prompt to response text.
    TableDriven(BTreeMap<String, String>),
}

pub struct ScriptedModel {
    strategy: Strategy,
    id: String,
    letter_answers: HashMap<String, String>,
}

pub fn make_scripted_model(strategy: Strategy) -> ScriptedModel {
    let id = match &strategy {
        Strategy::Oracle => "mock:oracle".to_string(),
        Strategy::UniformRandom(seed) => format!("mock:uniform-random:{seed}"),
        Strategy::FixedText(_) => "mock:fixed-text".to_string(),
        Strategy::TableDriven(_) => "mock:table".to_string(),
    };
    ScriptedModel { strategy, id, letter_answers: HashMap::new() }
}

/// Whitespace-separated pieces with byte offsets.
pub fn whitespace_tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &text[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

fn tokens_with(text: &str, mut logprob: impl FnMut(usize, &str) -> f64) -> Vec<Token> {
    whitespace_tokens(text)
        .into_iter()
        .enumerate()
        .map(|(i, (offset, t))| Token {
            text: t.to_string(),
            logprob: (i > 0).then(|| logprob(offset, t)),
            offset,
        })
        .collect()
}

impl ScriptedModel {
    /// Register the letter-string problems of a set so the oracle can
    /// answer their prompts in every format.
    pub fn with_problems(mut self, set: &ProblemSet) -> Self {
        for p in set.problems.iter().filter_map(Problem::as_letter_string) {
            for format in [PromptFormat::Standard, PromptFormat::NoPrompt, PromptFormat::Sentence] {
                let answer = format!("{}{}", p.answer.join(" "), format.terminator());
                self.letter_answers.insert(render_letterstring_prompt(p, format), answer);
            }
        }
        self
    }

    fn oracle_text(&self, prompt: &str) -> Result<String, ModelError> {
        if let Some(a) = self.letter_answers.get(prompt) {
            return Ok(a.clone());
        }
        let parsed = parse_matrix_prompt(prompt).map_err(|e| ModelError::Scripted(format!("oracle cannot read prompt: {e}")))?;
        let solved = solve(&parsed.grid, None).map_err(|e| ModelError::Scripted(e.to_string()))?;
        Ok(format!("{}]", solved.answers[0].0.inner_text()))
    }

    fn generate(&self, prompt: &str) -> Result<String, ModelError> {
        match &self.strategy {
            Strategy::Oracle => self.oracle_text(prompt),
            Strategy::UniformRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(*seed, prompt));
                Ok(format!("{}]", rng.gen_range(0..10)))
            }
            Strategy::FixedText(t) => Ok(t.clone()),
            Strategy::TableDriven(map) => {
                map.get(prompt).cloned().ok_or_else(|| ModelError::Scripted("prompt not in table".into()))
            }
        }
    }

    /// The oracle judges a closed completion against the solver's
    /// preferred interpretation, the same one it generates from.
    fn score(&self, prompt: &str) -> Vec<Token> {
        match &self.strategy {
            Strategy::Oracle => match parse_matrix_prompt(prompt) {
                Ok(parsed) if parsed.completion.is_some() => {
                    let given = parsed.completion.unwrap();
                    let right = solve(&parsed.grid, None)
                        .ok()
                        .and_then(|r| r.answers.into_iter().next())
                        .is_some_and(|(cell, how)| answers_equivalent(how.answer_kind(), &cell, &given));
                    let choice_start = prompt.rfind('[').unwrap_or(0);
                    let value = if right { 0.0 } else { -1.0 };
                    tokens_with(prompt, |offset, t| if offset + t.len() > choice_start { value } else { -0.5 })
                }
                _ => tokens_with(prompt, |_, _| -1.0),
            },
            Strategy::UniformRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(*seed, prompt));
                let u: f64 = -10.0 * rng.gen::<f64>();
                tokens_with(prompt, |_, _| u)
            }
            Strategy::FixedText(_) | Strategy::TableDriven(_) => tokens_with(prompt, |_, _| -1.0),
        }
    }
}

impl ModelClient for ScriptedModel {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let prompt_tokens = if request.echo { self.score(&request.prompt) } else { Vec::new() };
        let text = if request.max_tokens > 0 { self.generate(&request.prompt)? } else { String::new() };
        let completion_tokens = tokens_with(&text, |_, _| -0.1);
        Ok(Completion { text, prompt_tokens, completion_tokens })
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        Ok(tokens_with(text, |_, _| 0.0))
    }
}
