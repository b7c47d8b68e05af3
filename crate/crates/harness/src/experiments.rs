//! Experiment drivers: isolated runs over problem sets, recursive-context
//! runs with a bounded token window, and the story and verbal protocols.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use anabench_core::digitmat::DigitMatrixProblem;
use anabench_core::letterstring::PromptFormat;
use anabench_core::model::{Completion, CompletionRequest, ModelClient, ModelError, Token};
use anabench_core::render_matrix_prompt;
use anabench_core::semantic::{
    parse_story_choice, render_story_prompt, render_verbal_prompt, score_verbal_item, story_comparisons, StoryChoice,
    StoryItem, VerbalItem,
};
use anabench_core::{prompt_hash, EvalMode, EvalRecord, Family, Problem, ProblemId, ProblemSet, RecordFlag};

use crate::scoring::{base_record, generative_prompt, score_generative, score_multiple_choice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Generative,
    MultipleChoice,
    Both,
}

impl std::str::FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gen" | "generative" => Ok(RunMode::Generative),
            "mc" | "multiple_choice" | "multiple-choice" => Ok(RunMode::MultipleChoice),
            "both" => Ok(RunMode::Both),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextPolicy {
    Isolated,
    Recursive,
}

/// Token window of the evaluated model.
pub const DEFAULT_CONTEXT_WINDOW: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: Family,
    pub mode: RunMode,
    pub max_tokens: u32,
    pub context_policy: ContextPolicy,
    pub context_window_tokens: usize,
    pub seed: u64,
    pub format: PromptFormat,
    /// Concurrent requests for isolated runs.
    pub jobs: usize,
    /// Store wall-clock latency in records. Off keeps outputs reproducible.
    pub record_timing: bool,
}

impl RunConfig {
    pub fn for_family(family: Family) -> Self {
        let (max_tokens, context_policy) = match family {
            Family::DigitMatrix => (10, ContextPolicy::Isolated),
            Family::LetterString => (40, ContextPolicy::Isolated),
            Family::Verbal => (10, ContextPolicy::Recursive),
            Family::Story => (256, ContextPolicy::Isolated),
        };
        RunConfig {
            family,
            mode: RunMode::Both,
            max_tokens,
            context_policy,
            context_window_tokens: DEFAULT_CONTEXT_WINDOW,
            seed: 0,
            format: PromptFormat::Standard,
            jobs: 4,
            record_timing: false,
        }
    }
}

fn error_record(problem: &Problem, mode: EvalMode, prompt: &str, err: &ModelError) -> EvalRecord {
    let mut rec = base_record(problem, mode, prompt);
    rec.flags.push(RecordFlag::Error);
    rec.error = Some(err.to_string());
    rec
}

fn finish(mut rec: EvalRecord, model: &dyn ModelClient, started: Instant, config: &RunConfig) -> EvalRecord {
    rec.agent = format!("model:{}", model.id());
    if config.record_timing {
        rec.timing_ms = started.elapsed().as_millis() as u64;
    }
    rec
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn generative_pass(model: &dyn ModelClient, problems: &[&Problem], config: &RunConfig) -> Vec<EvalRecord> {
    with_pool(config.jobs, || {
        problems
            .par_iter()
            .map(|p| {
                let started = Instant::now();
                let prompt = generative_prompt(p, config.format);
                let rec = match model.complete(&CompletionRequest::generate(prompt.clone(), config.max_tokens)) {
                    Ok(c) => score_generative(p, &c.text, config.format),
                    Err(e) => error_record(p, EvalMode::Generative, &prompt, &e),
                };
                finish(rec, model, started, config)
            })
            .collect()
    })
}

fn choice_pass(model: &dyn ModelClient, problems: &[&Problem], config: &RunConfig) -> Vec<EvalRecord> {
    with_pool(config.jobs, || {
        problems
            .par_iter()
            .filter_map(|p| p.as_digit_matrix().map(|dm| (*p, dm)))
            .map(|(p, dm)| {
                let started = Instant::now();
                let rec = score_multiple_choice(model, dm, "")
                    .unwrap_or_else(|e| error_record(p, EvalMode::MultipleChoice, &render_matrix_prompt(&dm.grid), &e));
                finish(rec, model, started, config)
            })
            .collect()
    })
}

/// Isolated-context evaluation of every problem; with `RunMode::Both`
/// the generative pass runs first. Failures become flagged records.
pub fn run_isolated_experiment(model: &dyn ModelClient, set: &ProblemSet, config: &RunConfig) -> Vec<EvalRecord> {
    let problems: Vec<&Problem> = set.problems.iter().collect();
    let mut out = Vec::new();
    if matches!(config.mode, RunMode::Generative | RunMode::Both) {
        out.extend(generative_pass(model, &problems, config));
    }
    if matches!(config.mode, RunMode::MultipleChoice | RunMode::Both) {
        out.extend(choice_pass(model, &problems, config));
    }
    out
}

pub fn run_digitmat_experiment(model: &dyn ModelClient, set: &ProblemSet, mode: RunMode) -> Vec<EvalRecord> {
    let config = RunConfig { mode, ..RunConfig::for_family(Family::DigitMatrix) };
    run_isolated_experiment(model, set, &config)
}

pub fn run_letterstring_experiment(model: &dyn ModelClient, set: &ProblemSet, format: PromptFormat) -> Vec<EvalRecord> {
    let config = RunConfig { mode: RunMode::Generative, format, ..RunConfig::for_family(Family::LetterString) };
    run_isolated_experiment(model, set, &config)
}

/// Rejects any request whose prompt plus completion budget exceeds the
/// window, and remembers the largest prompt seen.
pub struct WindowGuard<'a> {
    inner: &'a dyn ModelClient,
    window: usize,
    pub max_prompt_tokens: AtomicUsize,
    pub rejected: AtomicUsize,
}

impl<'a> WindowGuard<'a> {
    pub fn new(inner: &'a dyn ModelClient, window: usize) -> Self {
        WindowGuard { inner, window, max_prompt_tokens: AtomicUsize::new(0), rejected: AtomicUsize::new(0) }
    }
}

impl ModelClient for WindowGuard<'_> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let tokens = self.inner.tokenize(&request.prompt)?.len();
        self.max_prompt_tokens.fetch_max(tokens, Ordering::SeqCst);
        if tokens + request.max_tokens as usize > self.window {
            self.rejected.fetch_add(1, Ordering::SeqCst);
            return Err(ModelError::ContextOverflow { tokens, window: self.window });
        }
        self.inner.complete(request)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        self.inner.tokenize(text)
    }
}

/// A growing prompt prefix of solved problems with oldest-first deletion.
pub struct RecursiveContext {
    entries: VecDeque<(String, String)>,
    separator: &'static str,
    window: Option<usize>,
}

impl RecursiveContext {
    pub fn new(separator: &'static str, window: Option<usize>) -> Self {
        RecursiveContext { entries: VecDeque::new(), separator, window }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Labels of the entries currently held, oldest first.
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|(l, _)| l.clone()).collect()
    }

    /// Entries joined by the separator.
    pub fn joined(&self) -> String {
        self.entries.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join(self.separator)
    }

    /// The joined entries followed by a separator, or empty.
    pub fn prefix(&self) -> String {
        if self.entries.is_empty() {
            String::new()
        } else {
            format!("{}{}", self.joined(), self.separator)
        }
    }

    pub fn push(&mut self, label: String, text: String) {
        self.entries.push_back((label, text));
    }

    /// Delete entries from the front until `render(self)` fits the window
    /// for every candidate. Returns the labels of deleted entries.
    pub fn fit(
        &mut self,
        model: &dyn ModelClient,
        render: impl Fn(&Self) -> Vec<String>,
    ) -> Result<Vec<String>, ModelError> {
        let Some(window) = self.window else { return Ok(Vec::new()) };
        let mut deleted = Vec::new();
        loop {
            let mut longest = 0;
            for prompt in render(self) {
                longest = longest.max(model.tokenize(&prompt)?.len());
            }
            if longest <= window {
                return Ok(deleted);
            }
            match self.entries.pop_front() {
                Some((label, _)) => deleted.push(label),
                None => return Err(ModelError::ContextOverflow { tokens: longest, window }),
            }
        }
    }
}

/// Separator between problems in a recursive matrix context.
pub const MATRIX_CONTEXT_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgressiveRun {
    pub run: usize,
    pub records: Vec<EvalRecord>,
    /// (position of the problem about to be presented, deleted problem).
    pub deletions: Vec<(usize, String)>,
    pub max_prompt_tokens: usize,
}

/// One run of the easy-to-hard protocol: each problem is scored by
/// multiple choice after the context of previously solved problems.
/// `window` of `None` disables deletion.
pub fn run_progressive_experiment(
    model: &dyn ModelClient,
    problems: &[&DigitMatrixProblem],
    window: Option<usize>,
    run: usize,
) -> ProgressiveRun {
    let guard = WindowGuard::new(model, window.unwrap_or(usize::MAX));
    let mut ctx = RecursiveContext::new(MATRIX_CONTEXT_SEPARATOR, window);
    let mut records = Vec::with_capacity(problems.len());
    let mut deletions = Vec::new();
    for (pos, p) in problems.iter().enumerate() {
        let body = render_matrix_prompt(&p.grid);
        let candidates = |c: &RecursiveContext| {
            let prefix = c.prefix();
            p.choices.iter().map(|ch| format!("{prefix}{body}{}]", ch.inner_text())).collect()
        };
        let wrapped = Problem::DigitMatrix((*p).clone());
        let scored = ctx.fit(&guard, candidates).and_then(|deleted| {
            deletions.extend(deleted.into_iter().map(|d| (pos, d)));
            score_multiple_choice(&guard, p, &ctx.prefix())
        });
        let mut rec = match scored {
            Ok(rec) => {
                let chosen = rec.selected_choice.map(|i| p.choices[i].inner_text()).unwrap_or_default();
                ctx.push(p.id.to_string(), format!("{body}{chosen}]"));
                rec
            }
            Err(e) => error_record(&wrapped, EvalMode::MultipleChoice, &body, &e),
        };
        rec.agent = format!("model:{}", model.id());
        rec.labels.insert("run".into(), run.to_string());
        rec.labels.insert("position".into(), pos.to_string());
        records.push(rec);
    }
    ProgressiveRun { run, records, deletions, max_prompt_tokens: guard.max_prompt_tokens.load(Ordering::SeqCst) }
}

/// Problems for run `run`: the subtypes in the order they first appear
/// in the set, taking each subtype's `run`-th instance (cycling).
pub fn progressive_sequence(set: &ProblemSet, run: usize) -> Vec<&DigitMatrixProblem> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_subtype: BTreeMap<&str, Vec<&DigitMatrixProblem>> = BTreeMap::new();
    for p in set.problems.iter().filter_map(Problem::as_digit_matrix) {
        if !by_subtype.contains_key(p.subtype.as_str()) {
            order.push(&p.subtype);
        }
        by_subtype.entry(&p.subtype).or_default().push(p);
    }
    order.iter().map(|s| { let v = &by_subtype[s]; v[run % v.len()] }).collect()
}

/// Independent progressive runs, executed in parallel.
pub fn run_progressive_runs(model: &dyn ModelClient, set: &ProblemSet, runs: usize, window: Option<usize>) -> Vec<ProgressiveRun> {
    (0..runs)
        .into_par_iter()
        .map(|r| run_progressive_experiment(model, &progressive_sequence(set, r), window, r))
        .collect()
}

/// The 72-comparison story protocol: every item in both target orders,
/// each in a fresh context.
pub fn run_story_experiment(model: &dyn ModelClient, items: &[StoryItem], config: &RunConfig) -> Vec<EvalRecord> {
    let comparisons = story_comparisons(items);
    with_pool(config.jobs, || {
        comparisons
            .par_iter()
            .enumerate()
            .map(|(i, cmp)| {
                let started = Instant::now();
                let item = &items[cmp.item];
                let prompt = render_story_prompt(item, cmp.order);
                let mut rec = EvalRecord {
                    problem_id: ProblemId {
                        family: Family::Story,
                        subtype: item.condition.to_string(),
                        instance: i as u32,
                        seed: config.seed,
                    },
                    agent: String::new(),
                    mode: EvalMode::Generative,
                    raw_response: String::new(),
                    parsed_answer: None,
                    selected_choice: None,
                    choice_scores: None,
                    correct: false,
                    prompt_hash: prompt_hash(&prompt),
                    timing_ms: 0,
                    flags: Vec::new(),
                    error: None,
                    labels: BTreeMap::from([
                        ("condition".to_string(), item.condition.to_string()),
                        ("group".to_string(), item.group_id.clone()),
                        ("order".to_string(), serde_json::to_value(cmp.order).unwrap().as_str().unwrap().to_string()),
                    ]),
                };
                match model.complete(&CompletionRequest::generate(prompt, config.max_tokens)) {
                    Ok(c) => {
                        let choice = parse_story_choice(&c.text);
                        if choice == StoryChoice::Unparseable {
                            rec.flags.push(RecordFlag::Unparseable);
                        }
                        rec.correct = choice == StoryItem::correct_choice(cmp.order);
                        rec.parsed_answer = serde_json::to_value(choice).ok();
                        rec.raw_response = c.text;
                    }
                    Err(e) => {
                        rec.flags.push(RecordFlag::Error);
                        rec.error = Some(e.to_string());
                    }
                }
                finish(rec, model, started, config)
            })
            .collect()
    })
}

/// Verbal items in a seeded shuffled order with the recursive context.
/// A model error ends the run; records up to that point are returned
/// with the failing item flagged.
pub fn run_verbal_experiment(model: &dyn ModelClient, items: &[VerbalItem], config: &RunConfig) -> Vec<EvalRecord> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let window = (config.context_policy == ContextPolicy::Recursive).then_some(config.context_window_tokens);
    let mut ctx = RecursiveContext::new("\n", window);
    let mut out = Vec::with_capacity(items.len());
    for idx in order {
        let item = &items[idx];
        let started = Instant::now();
        let mut rec = EvalRecord {
            problem_id: ProblemId { family: Family::Verbal, subtype: item.dataset.name().into(), instance: idx as u32, seed: config.seed },
            agent: String::new(),
            mode: EvalMode::MultipleChoice,
            raw_response: String::new(),
            parsed_answer: None,
            selected_choice: None,
            choice_scores: None,
            correct: false,
            prompt_hash: prompt_hash(&render_verbal_prompt("", item, 0)),
            timing_ms: 0,
            flags: Vec::new(),
            error: None,
            labels: BTreeMap::from([("relation".to_string(), item.relation.clone())]),
        };
        if let Some(d) = item.distance {
            rec.labels.insert("condition".into(), d.to_string());
        }
        let candidates = |c: &RecursiveContext| (0..item.choices.len()).map(|i| render_verbal_prompt(&c.joined(), item, i)).collect();
        let scored = ctx.fit(model, candidates).and_then(|_| score_verbal_item(model, &ctx.joined(), item));
        match scored {
            Ok(s) => {
                rec.selected_choice = Some(s.selected);
                rec.correct = s.selected == item.correct_index;
                if s.tied {
                    rec.flags.push(RecordFlag::Tie);
                }
                rec.raw_response = render_verbal_prompt("", item, s.selected);
                rec.choice_scores = Some(s.scores);
                ctx.push(idx.to_string(), rec.raw_response.clone());
                out.push(finish(rec, model, started, config));
            }
            Err(e) => {
                rec.flags.push(RecordFlag::Error);
                rec.error = Some(e.to_string());
                out.push(finish(rec, model, started, config));
            }
        }
    }
    out
}
