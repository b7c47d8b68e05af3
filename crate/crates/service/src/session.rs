//! Session state, the response protocol, trial payloads and export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use anabench_core::letterstring::{render_letterstring_prompt, PromptFormat};
use anabench_core::semantic::{render_story_prompt, StoryChoice, StoryItem};
use anabench_core::{
    answers_equivalent, parse_generated_answer, prompt_hash, render_matrix_display, render_matrix_prompt, EvalMode,
    EvalRecord, Family, Problem, ProblemId,
};

use crate::design::{Experiment, Materials, Trial};

/// A participant's submission for the current trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanResponse {
    pub trial_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub story_choice: Option<StoryChoice>,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredResponse {
    pub response: HumanResponse,
    pub mode: EvalMode,
    pub correct: bool,
    pub received_at_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    FreeResponse,
    Choice,
    StoryChoice,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: Vec<Trial>,
    pub cursor: usize,
    pub responses: Vec<StoredResponse>,
    pub created_at_ms: u64,
    pub completed_at_ms: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResponseError {
    /// The submission does not fit the session's position in the protocol.
    #[error("{0}")]
    Conflict(String),
    /// The submission is malformed for the current trial.
    #[error("{0}")]
    Invalid(String),
    #[error("trial material {0} is not loaded")]
    MissingMaterial(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ack {
    pub trial_id: usize,
    pub correct: bool,
    pub stage: Stage,
    pub done: bool,
}

fn letter_display(p: &anabench_core::letterstring::LetterStringProblem) -> [String; 2] {
    [
        format!("[{}] [{}]", p.source_left.join(" "), p.source_right.join(" ")),
        format!("[{}] [ ? ]", p.target_stem.join(" ")),
    ]
}

/// Instructions and the worked example shown before the first trial.
pub fn instructions(experiment: Experiment) -> Value {
    match experiment {
        Experiment::DigitMat32 | Experiment::DigitMat42Ordered => json!({
            "text": "Each problem is a 3 by 3 grid of cells with the last cell missing. Work out the rule and type the digits that belong in the missing cell, then pick the matching answer from the choices.",
            "example": {
                "display": [["[1]", "[1]", "[1]"], ["[4]", "[4]", "[4]"], ["[7]", "[7]", "[ ? ]"]],
                "answer": "7"
            }
        }),
        Experiment::LetterString28 => json!({
            "text": "Each problem shows a pair of letter strings followed by a third string. Type the string that completes the pattern, with letters separated by spaces.",
            "example": { "display": ["[a a a] [b b b]", "[c c c] [ ? ]"], "answer": "d d d" }
        }),
        Experiment::Story18 => json!({
            "text": "Read Story 1, then Story A and Story B. Which of Story A and Story B is a better analogy to Story 1? You may also answer that both are equally analogous.",
            "options": ["A", "B", "Both"]
        }),
    }
}

impl Session {
    pub fn new(id: String, experiment: Experiment, seed: u64, trials: Vec<Trial>, now_ms: u64) -> Self {
        let completed_at_ms = trials.is_empty().then_some(now_ms);
        Session { id, experiment, seed, trials, cursor: 0, responses: Vec::new(), created_at_ms: now_ms, completed_at_ms }
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.trials.len()
    }

    /// Where the current trial stands in its response sequence.
    pub fn stage(&self) -> Stage {
        match self.trials.get(self.cursor) {
            None => Stage::Done,
            Some(Trial::DigitMatrix { .. }) => {
                let free_done = self.responses.last().is_some_and(|r| {
                    r.response.trial_id == self.cursor && r.mode == EvalMode::Generative
                });
                if free_done { Stage::Choice } else { Stage::FreeResponse }
            }
            Some(Trial::LetterString { .. }) => Stage::FreeResponse,
            Some(Trial::Story { .. }) => Stage::StoryChoice,
        }
    }

    fn free_text(&self, trial: usize) -> Option<&str> {
        self.responses
            .iter()
            .find(|r| r.response.trial_id == trial && r.mode == EvalMode::Generative)
            .and_then(|r| r.response.free_response.as_deref())
    }

    /// The current trial's payload, never including answers.
    pub fn next_payload(&self, m: &Materials) -> Result<Value, ResponseError> {
        let Some(trial) = self.trials.get(self.cursor) else {
            return Ok(json!({ "done": true }));
        };
        let stage = self.stage();
        let mut v = json!({
            "done": false,
            "trial_id": self.cursor,
            "trial_number": self.cursor + 1,
            "total": self.trials.len(),
            "stage": stage,
        });
        match trial {
            Trial::DigitMatrix { problem } => {
                let p = lookup(m, problem)?.as_digit_matrix().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                v["kind"] = json!("digit_matrix");
                v["display"] = json!(render_matrix_display(&p.grid));
                if stage == Stage::Choice {
                    v["choices"] = json!(p.choices.iter().map(|c| c.to_string()).collect::<Vec<_>>());
                    v["free_response"] = json!(self.free_text(self.cursor));
                }
            }
            Trial::LetterString { problem } => {
                let p = lookup(m, problem)?.as_letter_string().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                v["kind"] = json!("letter_string");
                v["display"] = json!(letter_display(p));
            }
            Trial::Story { item, order } => {
                let s = story(m, *item)?;
                let (a, b) = s.targets(*order);
                v["kind"] = json!("story");
                v["story1"] = json!(s.source);
                v["storyA"] = json!(a);
                v["storyB"] = json!(b);
                v["options"] = json!(["A", "B", "Both"]);
            }
        }
        Ok(v)
    }

    /// Validate a submission against the current trial and apply it.
    pub fn apply(&mut self, m: &Materials, r: HumanResponse, now_ms: u64) -> Result<Ack, ResponseError> {
        if self.is_done() {
            return Err(ResponseError::Conflict("session is complete".into()));
        }
        if r.trial_id != self.cursor {
            return Err(ResponseError::Conflict(format!("trial {} is not the current trial {}", r.trial_id, self.cursor)));
        }
        let stage = self.stage();
        let (mode, correct, advance) = match (&self.trials[self.cursor], stage) {
            (Trial::DigitMatrix { problem }, Stage::FreeResponse) => {
                let p = lookup(m, problem)?.as_digit_matrix().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                let Some(text) = &r.free_response else {
                    return Err(match r.choice_index {
                        Some(_) => ResponseError::Conflict("a free response is required before choosing".into()),
                        None => ResponseError::Invalid("free_response is required".into()),
                    });
                };
                if r.choice_index.is_some() || r.story_choice.is_some() {
                    return Err(ResponseError::Invalid("submit the free response on its own".into()));
                }
                let cell = parse_generated_answer(text, p.kind)
                    .map_err(|_| ResponseError::Invalid(format!("cannot read {text:?} as digits")))?;
                (EvalMode::Generative, answers_equivalent(p.kind, &p.answer, &cell), false)
            }
            (Trial::DigitMatrix { problem }, _) => {
                let p = lookup(m, problem)?.as_digit_matrix().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                if r.free_response.is_some() {
                    return Err(ResponseError::Conflict("the free response is locked once submitted".into()));
                }
                let i = r.choice_index.ok_or_else(|| ResponseError::Invalid("choice_index is required".into()))?;
                if i >= p.choices.len() {
                    return Err(ResponseError::Invalid(format!("choice_index {i} is out of range")));
                }
                (EvalMode::MultipleChoice, i == p.correct_choice, true)
            }
            (Trial::LetterString { problem }, _) => {
                let p = lookup(m, problem)?.as_letter_string().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                if r.choice_index.is_some() || r.story_choice.is_some() {
                    return Err(ResponseError::Invalid("letter-string trials take a free response only".into()));
                }
                let tokens = letter_tokens(r.free_response.as_deref().unwrap_or(""));
                if tokens.is_empty() {
                    return Err(ResponseError::Invalid("free_response must contain at least one token".into()));
                }
                (EvalMode::Generative, tokens == p.answer, true)
            }
            (Trial::Story { item: _, order }, _) => {
                if r.free_response.is_some() || r.choice_index.is_some() {
                    return Err(ResponseError::Invalid("story trials take story_choice only".into()));
                }
                let choice = match r.story_choice {
                    Some(StoryChoice::Unparseable) | None => {
                        return Err(ResponseError::Invalid("story_choice must be story_a, story_b or both".into()))
                    }
                    Some(c) => c,
                };
                (EvalMode::Generative, choice == StoryItem::correct_choice(*order), true)
            }
        };
        let trial_id = self.cursor;
        self.responses.push(StoredResponse { response: r, mode, correct, received_at_ms: now_ms });
        if advance {
            self.cursor += 1;
            if self.is_done() {
                self.completed_at_ms = Some(now_ms);
            }
        }
        Ok(Ack { trial_id, correct, stage: self.stage(), done: self.is_done() })
    }

    /// Records comparable to model output, one per stored response.
    pub fn export(&self, m: &Materials) -> Result<Vec<EvalRecord>, ResponseError> {
        self.responses.iter().map(|s| self.record(m, s)).collect()
    }

    fn record(&self, m: &Materials, s: &StoredResponse) -> Result<EvalRecord, ResponseError> {
        let r = &s.response;
        let mut rec = EvalRecord {
            problem_id: ProblemId { family: Family::Story, subtype: String::new(), instance: 0, seed: self.seed },
            agent: format!("human:{}", self.id),
            mode: s.mode,
            raw_response: String::new(),
            parsed_answer: None,
            selected_choice: None,
            choice_scores: None,
            correct: s.correct,
            prompt_hash: String::new(),
            timing_ms: r.latency_ms,
            flags: Vec::new(),
            error: None,
            labels: BTreeMap::new(),
        };
        match &self.trials[r.trial_id] {
            Trial::DigitMatrix { problem } => {
                let wrapped = lookup(m, problem)?;
                let p = wrapped.as_digit_matrix().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                rec.problem_id = problem.clone();
                rec.prompt_hash = prompt_hash(&render_matrix_prompt(&p.grid));
                rec.labels = wrapped.labels();
                if let Some(i) = r.choice_index {
                    rec.selected_choice = Some(i);
                    rec.raw_response = p.choices[i].inner_text();
                    rec.parsed_answer = serde_json::to_value(&p.choices[i]).ok();
                } else {
                    let text = r.free_response.clone().unwrap_or_default();
                    rec.parsed_answer = parse_generated_answer(&text, p.kind).ok().and_then(|c| serde_json::to_value(c).ok());
                    rec.raw_response = text;
                }
            }
            Trial::LetterString { problem } => {
                let wrapped = lookup(m, problem)?;
                let p = wrapped.as_letter_string().ok_or_else(|| ResponseError::MissingMaterial(problem.to_string()))?;
                rec.problem_id = problem.clone();
                rec.prompt_hash = prompt_hash(&render_letterstring_prompt(p, PromptFormat::Standard));
                rec.labels = wrapped.labels();
                rec.raw_response = r.free_response.clone().unwrap_or_default();
                rec.parsed_answer = serde_json::to_value(letter_tokens(&rec.raw_response)).ok();
            }
            Trial::Story { item, order } => {
                let st = story(m, *item)?;
                rec.problem_id = ProblemId { family: Family::Story, subtype: st.condition.to_string(), instance: *item as u32, seed: self.seed };
                rec.prompt_hash = prompt_hash(&render_story_prompt(st, *order));
                let choice = r.story_choice.unwrap_or(StoryChoice::Unparseable);
                rec.parsed_answer = serde_json::to_value(choice).ok();
                rec.raw_response = rec.parsed_answer.as_ref().and_then(Value::as_str).unwrap_or_default().to_string();
                rec.labels.insert("condition".into(), st.condition.to_string());
                rec.labels.insert("group".into(), st.group_id.clone());
                rec.labels.insert("order".into(), serde_json::to_value(order).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
            }
        }
        Ok(rec)
    }
}

/// Whitespace tokens with any enclosing brackets removed.
fn letter_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.trim_matches(|c| c == '[' || c == ']')).filter(|t| !t.is_empty()).map(String::from).collect()
}

fn lookup<'a>(m: &'a Materials, id: &ProblemId) -> Result<&'a Problem, ResponseError> {
    m.problem(id).ok_or_else(|| ResponseError::MissingMaterial(id.to_string()))
}

fn story(m: &Materials, item: usize) -> Result<&StoryItem, ResponseError> {
    m.stories.get(item).ok_or_else(|| ResponseError::MissingMaterial(format!("story item {item}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_tokens_strip_brackets() {
        assert_eq!(letter_tokens("[i j k m]"), ["i", "j", "k", "m"]);
        assert_eq!(letter_tokens(" [ a ] "), ["a"]);
        assert!(letter_tokens("[ ]").is_empty());
    }

    #[test]
    fn empty_session_is_done() {
        let s = Session::new("x".into(), Experiment::Story18, 0, vec![], 5);
        assert!(s.is_done());
        assert_eq!(s.stage(), Stage::Done);
        assert_eq!(s.completed_at_ms, Some(5));
        assert_eq!(s.next_payload(&Materials::default()).unwrap(), json!({"done": true}));
    }
}
