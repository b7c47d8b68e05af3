//! Generative and multiple-choice scoring of single problems.

use log::info;

use anabench_core::digitmat::DigitMatrixProblem;
use anabench_core::letterstring::{parse_letterstring_answer, render_letterstring_prompt, PromptFormat};
use anabench_core::model::{argmax_lowest, mean_logprob, CompletionRequest, ModelClient, ModelError};
use anabench_core::{
    answers_equivalent, parse_generated_answer, render_matrix_prompt, EvalMode, EvalRecord, Problem, RecordFlag,
};

use anabench_core::prompt_hash;

/// The prompt a problem is presented with in generative mode.
pub fn generative_prompt(problem: &Problem, format: PromptFormat) -> String {
    match problem {
        Problem::DigitMatrix(p) => render_matrix_prompt(&p.grid),
        Problem::LetterString(p) => render_letterstring_prompt(p, format),
    }
}

pub(crate) fn base_record(problem: &Problem, mode: EvalMode, prompt: &str) -> EvalRecord {
    EvalRecord {
        problem_id: problem.id().clone(),
        agent: String::new(),
        mode,
        raw_response: String::new(),
        parsed_answer: None,
        selected_choice: None,
        choice_scores: None,
        correct: false,
        prompt_hash: prompt_hash(prompt),
        timing_ms: 0,
        flags: Vec::new(),
        error: None,
        labels: problem.labels(),
    }
}

/// Score a free completion of the problem's generative prompt.
///
/// The response is cut at the format's terminator before parsing. An
/// unparseable response is incorrect and flagged.
pub fn score_generative(problem: &Problem, response: &str, format: PromptFormat) -> EvalRecord {
    let prompt = generative_prompt(problem, format);
    let mut rec = base_record(problem, EvalMode::Generative, &prompt);
    rec.raw_response = response.to_string();
    match problem {
        Problem::DigitMatrix(p) => match parse_generated_answer(response, p.kind) {
            Ok(cell) => {
                rec.correct = answers_equivalent(p.kind, &p.answer, &cell);
                rec.parsed_answer = serde_json::to_value(&cell).ok();
            }
            Err(_) => rec.flags.push(RecordFlag::Unparseable),
        },
        Problem::LetterString(p) => {
            let tokens = parse_letterstring_answer(response, format);
            if tokens.is_empty() {
                rec.flags.push(RecordFlag::Unparseable);
            } else {
                rec.correct = tokens == p.answer;
                rec.parsed_answer = serde_json::to_value(&tokens).ok();
            }
        }
    }
    rec
}

/// Choose among the eight choices by the mean log probability of each
/// choice's tokens, with the choice appended to the prompt and closed by
/// "]". `context` is prepended verbatim.
pub fn score_multiple_choice(
    model: &dyn ModelClient,
    problem: &DigitMatrixProblem,
    context: &str,
) -> Result<EvalRecord, ModelError> {
    let base = format!("{context}{}", render_matrix_prompt(&problem.grid));
    let wrapped = Problem::DigitMatrix(problem.clone());
    let mut rec = base_record(&wrapped, EvalMode::MultipleChoice, &base);
    let mut scores = Vec::with_capacity(problem.choices.len());
    for choice in &problem.choices {
        let text = choice.inner_text();
        let prompt = format!("{base}{text}]");
        let completion = model.complete(&CompletionRequest::score(prompt))?;
        let span = base.len()..base.len() + text.len();
        let score = mean_logprob(&completion.prompt_tokens, &[span])
            .ok_or_else(|| ModelError::Malformed("no log probabilities for the choice tokens".into()))?;
        scores.push(score);
    }
    let (selected, tied) = argmax_lowest(&scores).ok_or_else(|| ModelError::Malformed("problem has no choices".into()))?;
    if tied {
        info!("{}: tie among choices {:?}; selecting index {selected}", problem.id, scores);
        rec.flags.push(RecordFlag::Tie);
    }
    rec.selected_choice = Some(selected);
    rec.raw_response = problem.choices[selected].inner_text();
    rec.parsed_answer = serde_json::to_value(&problem.choices[selected]).ok();
    rec.choice_scores = Some(scores);
    rec.correct = selected == problem.correct_choice;
    Ok(rec)
}
