//! Command-line dispatch for the `anabench` binary: dataset generation,
//! oracle solving, model evaluation, accuracy tables, data validation,
//! prompt export and the human session service.
//!
//! Exit codes: 0 on success, 1 on usage or validation failure, 2 on
//! runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use thiserror::Error;

use anabench_core::digitmat::{build_dataset, DatasetSpec, SubtypeCatalog};
use anabench_core::letterstring::{build_letterstring_dataset, derive_answer, verify_problem, LetterDatasetSpec, PromptFormat};
use anabench_core::model::ModelClient;
use anabench_core::record::{read_jsonl, write_csv, write_jsonl};
use anabench_core::semantic::{load_story_items, load_verbal_dataset, VerbalDataset};
use anabench_core::solver::{solve, Interpretation};
use anabench_core::stats::{summarize, CiMethod, Grouping};
use anabench_core::{answers_equivalent, Cell, EvalRecord, Family, Problem, ProblemSet, RecordFlag};
use anabench_harness::client::API_KEY_ENV;
use anabench_harness::{
    export_problem_solving_prompts, make_scripted_model, run_isolated_experiment, run_progressive_runs,
    run_story_experiment, run_verbal_experiment, CachedClient, HttpClient, RunConfig, RunMode, Strategy,
};
use anabench_service::{AppState, Materials};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "anabench", version, about = "Analogy benchmark generation, evaluation and statistics")]
pub struct Cli {
    /// Output format of reports, records and tables (defaults per command).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Log errors only.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem set.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the rule-induction oracle over a problem set.
    Solve(SolveArgs),
    /// Evaluate a model on problems, stories or verbal items.
    Eval(EvalArgs),
    /// Accuracy tables with exact binomial intervals.
    Stats(StatsArgs),
    /// Serve human sessions over HTTP.
    Serve(ServeArgs),
    /// Check data files against their schemas and the oracles.
    ValidateData(ValidateArgs),
    /// Write the problem-solving prompt files.
    ExportPrompts(ExportArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Digit Matrices.
    Digitmat(GenDigitmatArgs),
    /// Letter-string analogies.
    Letterstring(GenLetterArgs),
}

#[derive(Debug, Args)]
pub struct GenDigitmatArgs {
    /// Comma-separated subtype names or bundles (exp1, exp2, all).
    #[arg(long, default_value = "exp1")]
    pub subtypes: String,
    /// Instances per subtype.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Base seed of every generated problem.
    #[arg(long, required_unless_present = "list")]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the subtype catalog and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct GenLetterArgs {
    /// Base seed of every generated problem.
    #[arg(long)]
    pub seed: u64,
    /// Problems per stratum cell.
    #[arg(long, default_value_t = 100)]
    pub per_group: usize,
    /// Keep the evaluation half of every stratum cell.
    #[arg(long)]
    pub eval_subset: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportScope {
    All,
    Ambiguity,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem-set JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report every problem, or only ambiguous and mismatched ones.
    #[arg(long, value_enum, default_value = "all")]
    pub report: ReportScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Digitmat,
    Letterstring,
    Story,
    Verbal,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::Digitmat => Family::DigitMatrix,
            FamilyArg::Letterstring => Family::LetterString,
            FamilyArg::Story => Family::Story,
            FamilyArg::Verbal => Family::Verbal,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum, default_value = "digitmat")]
    pub family: FamilyArg,
    /// gen, mc or both (digit matrices only; other families have one mode).
    #[arg(long)]
    pub mode: Option<RunMode>,
    /// mock:oracle, mock:uniform-random[:SEED], mock:fixed-text:TEXT, or an endpoint model name.
    #[arg(long)]
    pub model: String,
    /// Completions endpoint base URL for non-mock models.
    #[arg(long, env = "ANABENCH_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Problem set, story items or verbal dataset file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Records file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Letter-string prompt format: standard, no_prompt or sentence.
    #[arg(long, default_value = "standard")]
    pub prompt_format: PromptFormat,
    /// Concurrent requests.
    #[arg(long, default_value_t = 4)]
    pub jobs: usize,
    /// Directory caching completions across runs.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Seed of presentation order where the protocol shuffles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Verbal dataset name (ucla_vat, sternberg_nigro, sat_turney, jones_et_al).
    #[arg(long)]
    pub dataset: Option<VerbalDataset>,
    /// Run the easy-to-hard recursive protocol this many times.
    #[arg(long)]
    pub progressive_runs: Option<usize>,
    /// Token window for the recursive protocol (unbounded when absent).
    #[arg(long, requires = "progressive_runs")]
    pub window: Option<usize>,
    /// Completion token budget (family default when absent).
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// Token window for recursive verbal runs.
    #[arg(long)]
    pub context_window: Option<usize>,
    /// Record wall-clock latency per request.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiArg {
    ClopperPearson,
    Wilson,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Records files (JSON Lines).
    #[arg(long, required = true, num_args = 1..)]
    pub records: Vec<PathBuf>,
    /// Comma-separated groupings: subtype, family, mode, agent, rule_count, condition, or any label key.
    #[arg(long, value_delimiter = ',', default_value = "subtype")]
    pub group: Vec<Grouping>,
    /// Interval method.
    #[arg(long, value_enum, default_value = "clopper-pearson")]
    pub ci: CiArg,
    /// Table file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Problem-set JSON files to draw trials from (repeatable).
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    /// Story items JSON.
    #[arg(long)]
    pub stories: Option<PathBuf>,
    /// Directory for the event log and snapshots.
    #[arg(long, default_value = "./data")]
    pub store: PathBuf,
    /// Allowed CORS origin of the web UI (any origin when absent).
    #[arg(long)]
    pub origin: Option<String>,
    /// Events between snapshots.
    #[arg(long, default_value_t = anabench_service::api::DEFAULT_SNAPSHOT_EVERY)]
    pub snapshot_every: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).multiple(true).args(["problems", "stories", "verbal"])))]
pub struct ValidateArgs {
    /// Problem-set JSON.
    #[arg(long)]
    pub problems: Option<PathBuf>,
    /// Story items JSON.
    #[arg(long)]
    pub stories: Option<PathBuf>,
    /// Verbal dataset file (JSON or CSV).
    #[arg(long, requires = "dataset")]
    pub verbal: Option<PathBuf>,
    /// Verbal dataset name.
    #[arg(long)]
    pub dataset: Option<VerbalDataset>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(GenCommand::Digitmat(a)) => gen_digitmat(a, cli.format),
        Command::Gen(GenCommand::Letterstring(a)) => gen_letterstring(a, cli.format),
        Command::Solve(a) => solve_cmd(a, cli.format.unwrap_or(OutputFormat::Json)),
        Command::Eval(a) => eval_cmd(a, cli.format.unwrap_or(OutputFormat::Json)),
        Command::Stats(a) => stats_cmd(a, cli.format.unwrap_or(OutputFormat::Csv)),
        Command::Serve(a) => serve_cmd(a),
        Command::ValidateData(a) => validate_cmd(a),
        Command::ExportPrompts(a) => {
            for p in export_problem_solving_prompts(&a.out).map_err(runtime)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(bytes).map_err(runtime),
    }
}

fn json_only(format: Option<OutputFormat>) -> Result<(), CliError> {
    match format {
        Some(OutputFormat::Csv) => Err(CliError::Usage("problem sets are written as JSON only".into())),
        _ => Ok(()),
    }
}

fn load_set(path: &Path) -> Result<ProblemSet, CliError> {
    ProblemSet::load(path).map_err(|e| CliError::Validation(e.to_string()))
}

fn gen_digitmat(a: &GenDigitmatArgs, format: Option<OutputFormat>) -> Result<(), CliError> {
    let catalog = SubtypeCatalog::new();
    if a.list {
        let mut text = String::new();
        for s in catalog.all() {
            text.push_str(&format!("{}\t{}\t{}\n", s.name, s.rule_count(), s.problem_type()));
        }
        return emit(None, text.as_bytes());
    }
    json_only(format)?;
    let subtypes = catalog.resolve(&a.subtypes).map_err(CliError::Usage)?;
    if subtypes.is_empty() || a.n == 0 {
        return Err(CliError::Usage("need at least one subtype and --n >= 1".into()));
    }
    let seed = a.seed.expect("clap requires --seed");
    let set = build_dataset(&DatasetSpec { subtypes, instances_per_subtype: a.n, seed });
    if let Some(short) = set.metadata.get("shortfall").and_then(|v| v.as_object()).filter(|m| !m.is_empty()) {
        for (name, v) in short {
            warn!("{name}: only {} distinct instances exist", v["generated"]);
        }
    }
    info!("generated {} digit-matrix problems", set.problems.len());
    emit(a.out.as_deref(), (set.to_json() + "\n").as_bytes())
}

fn gen_letterstring(a: &GenLetterArgs, format: Option<OutputFormat>) -> Result<(), CliError> {
    json_only(format)?;
    if a.per_group == 0 {
        return Err(CliError::Usage("--per-group must be >= 1".into()));
    }
    let spec = LetterDatasetSpec { seed: a.seed, per_group: a.per_group, eval_subset: a.eval_subset };
    let set = build_letterstring_dataset(&spec).map_err(runtime)?;
    info!("generated {} letter-string problems", set.problems.len());
    emit(a.out.as_deref(), (set.to_json() + "\n").as_bytes())
}

/// Oracle verdict on one problem.
#[derive(Debug, Clone, Serialize)]
pub struct SolveEntry {
    pub id: String,
    pub family: Family,
    pub unique: bool,
    /// The oracle's preferred completion.
    pub answer: Option<String>,
    pub expected: String,
    pub matches: bool,
    pub interpretations: Vec<(Cell, Interpretation)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub problems: usize,
    pub ambiguous: usize,
    pub mismatched: usize,
}

pub fn check_problem(p: &Problem) -> SolveEntry {
    match p {
        Problem::DigitMatrix(dm) => {
            let base = SolveEntry {
                id: dm.id.to_string(),
                family: Family::DigitMatrix,
                unique: false,
                answer: None,
                expected: dm.answer.inner_text(),
                matches: false,
                interpretations: Vec::new(),
                error: None,
            };
            match solve(&dm.grid, None) {
                Ok(r) => {
                    let (cell, how) = &r.answers[0];
                    SolveEntry {
                        unique: r.unique,
                        answer: Some(cell.inner_text()),
                        matches: answers_equivalent(how.answer_kind(), &dm.answer, cell),
                        interpretations: r.answers.clone(),
                        ..base
                    }
                }
                Err(e) => SolveEntry { error: Some(e.to_string()), ..base },
            }
        }
        Problem::LetterString(ls) => {
            let derived = derive_answer(ls);
            SolveEntry {
                id: ls.id.to_string(),
                family: Family::LetterString,
                unique: true,
                answer: derived.as_ref().ok().map(|a| a.join(" ")),
                expected: ls.answer.join(" "),
                matches: verify_problem(ls),
                interpretations: Vec::new(),
                error: derived.err().map(|e| e.to_string()),
            }
        }
    }
}

fn solve_report(set: &ProblemSet) -> (SolveSummary, Vec<SolveEntry>) {
    let entries: Vec<SolveEntry> = set.problems.iter().map(check_problem).collect();
    let summary = SolveSummary {
        problems: entries.len(),
        ambiguous: entries.iter().filter(|e| !e.unique).count(),
        mismatched: entries.iter().filter(|e| !e.matches).count(),
    };
    (summary, entries)
}

fn solve_cmd(a: &SolveArgs, format: OutputFormat) -> Result<(), CliError> {
    let set = load_set(&a.input)?;
    let (summary, mut entries) = solve_report(&set);
    if a.report == ReportScope::Ambiguity {
        entries.retain(|e| !e.unique || !e.matches);
    }
    let bytes = match format {
        OutputFormat::Json => {
            let doc = serde_json::json!({ "summary": summary, "problems": entries });
            serde_json::to_vec_pretty(&doc).map_err(runtime)?
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "family", "unique", "matches", "answer", "expected", "interpretations", "error"])
                .map_err(runtime)?;
            for e in &entries {
                w.write_record([
                    e.id.clone(),
                    e.family.to_string(),
                    e.unique.to_string(),
                    e.matches.to_string(),
                    e.answer.clone().unwrap_or_default(),
                    e.expected.clone(),
                    e.interpretations.len().to_string(),
                    e.error.clone().unwrap_or_default(),
                ])
                .map_err(runtime)?;
            }
            w.into_inner().map_err(runtime)?
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    info!("{} problems, {} ambiguous, {} mismatched", summary.problems, summary.ambiguous, summary.mismatched);
    if summary.ambiguous + summary.mismatched > 0 {
        return Err(CliError::Validation(format!(
            "{} ambiguous and {} mismatched problems",
            summary.ambiguous, summary.mismatched
        )));
    }
    Ok(())
}

/// Build a model client from a `--model` spec.
pub fn build_model(spec: &str, endpoint: Option<&str>, set: Option<&ProblemSet>) -> Result<Box<dyn ModelClient>, CliError> {
    if let Some(rest) = spec.strip_prefix("mock:") {
        let strategy = match rest.split_once(':') {
            None if rest == "oracle" => Strategy::Oracle,
            None if rest == "uniform-random" => Strategy::UniformRandom(0),
            Some(("uniform-random", seed)) => Strategy::UniformRandom(
                seed.parse().map_err(|_| CliError::Usage(format!("bad uniform-random seed {seed:?}")))?,
            ),
            Some(("fixed-text", text)) => Strategy::FixedText(text.to_string()),
            _ => return Err(CliError::Usage(format!("unknown mock model {spec:?}"))),
        };
        let mut model = make_scripted_model(strategy);
        if let Some(set) = set {
            model = model.with_problems(set);
        }
        return Ok(Box::new(model));
    }
    let client = match endpoint {
        Some(url) => HttpClient::new(url, spec, std::env::var(API_KEY_ENV).ok()),
        None => HttpClient::from_env(spec),
    };
    Ok(Box::new(client.map_err(|e| CliError::Usage(e.to_string()))?))
}

fn check_family(set: &ProblemSet, family: Family) -> Result<(), CliError> {
    match set.problems.iter().find(|p| p.family() != family) {
        Some(p) => Err(CliError::Validation(format!("{} is not a {family} problem", p.id()))),
        None => Ok(()),
    }
}

fn eval_cmd(a: &EvalArgs, format: OutputFormat) -> Result<(), CliError> {
    let family = a.family.family();
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be >= 1".into()));
    }
    if a.progressive_runs.is_some() && family != Family::DigitMatrix {
        return Err(CliError::Usage("--progressive-runs applies to digit matrices only".into()));
    }
    if family != Family::DigitMatrix && a.mode.is_some_and(|m| m != RunMode::Generative) {
        return Err(CliError::Usage(format!("{family} items are evaluated in a single fixed mode")));
    }
    let mut config = RunConfig::for_family(family);
    config.mode = a.mode.unwrap_or(if family == Family::DigitMatrix { RunMode::Both } else { RunMode::Generative });
    config.format = a.prompt_format;
    config.jobs = a.jobs;
    config.seed = a.seed;
    config.record_timing = a.timing;
    if let Some(t) = a.max_tokens {
        config.max_tokens = t;
    }
    if let Some(w) = a.context_window {
        config.context_window_tokens = w;
    }

    let set = match family {
        Family::DigitMatrix | Family::LetterString => {
            let set = load_set(&a.input)?;
            check_family(&set, family)?;
            Some(set)
        }
        _ => None,
    };
    let mut model = build_model(&a.model, a.endpoint.as_deref(), set.as_ref())?;
    if let Some(dir) = &a.cache {
        model = Box::new(CachedClient::new(model, dir).map_err(runtime)?);
    }

    let records: Vec<EvalRecord> = match family {
        Family::DigitMatrix if a.progressive_runs.is_some() => {
            let set = set.as_ref().expect("loaded above");
            let runs = run_progressive_runs(model.as_ref(), set, a.progressive_runs.unwrap_or(1), a.window);
            for r in &runs {
                info!("run {}: {} deletions, longest prompt {} tokens", r.run, r.deletions.len(), r.max_prompt_tokens);
            }
            runs.into_iter().flat_map(|r| r.records).collect()
        }
        Family::DigitMatrix | Family::LetterString => {
            run_isolated_experiment(model.as_ref(), set.as_ref().expect("loaded above"), &config)
        }
        Family::Story => {
            let (items, warnings) = load_story_items(&a.input).map_err(|e| CliError::Validation(e.to_string()))?;
            warnings.iter().for_each(|w| warn!("{w}"));
            run_story_experiment(model.as_ref(), &items, &config)
        }
        Family::Verbal => {
            let dataset = a.dataset.ok_or_else(|| CliError::Usage("--dataset is required for verbal items".into()))?;
            let load = load_verbal_dataset(&a.input, dataset).map_err(|e| CliError::Validation(e.to_string()))?;
            load.warnings.iter().for_each(|w| warn!("{w}"));
            run_verbal_experiment(model.as_ref(), &load.items, &config)
        }
    };

    let mut bytes = Vec::new();
    match format {
        OutputFormat::Json => write_jsonl(&mut bytes, &records).map_err(runtime)?,
        OutputFormat::Csv => write_csv(&mut bytes, &records).map_err(runtime)?,
    }
    emit(a.out.as_deref(), &bytes)?;
    let correct = records.iter().filter(|r| r.correct).count();
    let errors = records.iter().filter(|r| r.has_flag(RecordFlag::Error)).count();
    info!("{} records, {correct} correct, {errors} errors", records.len());
    if errors > 0 {
        return Err(CliError::Runtime(format!("{errors} of {} requests failed", records.len())));
    }
    Ok(())
}

fn read_records(paths: &[PathBuf]) -> Result<Vec<EvalRecord>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        let file = std::fs::File::open(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let records = read_jsonl(std::io::BufReader::new(file))
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        out.extend(records);
    }
    Ok(out)
}

fn stats_cmd(a: &StatsArgs, format: OutputFormat) -> Result<(), CliError> {
    let records = read_records(&a.records)?;
    let method = match a.ci {
        CiArg::ClopperPearson => CiMethod::ClopperPearson,
        CiArg::Wilson => CiMethod::Wilson,
    };
    let table = summarize(&records, &a.group, method).map_err(|e| CliError::Validation(e.to_string()))?;
    let bytes = match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(runtime)?;
            buf
        }
        OutputFormat::Json => serde_json::to_vec_pretty(&table).map_err(runtime)?,
    };
    emit(a.out.as_deref(), &bytes)
}

fn serve_cmd(a: &ServeArgs) -> Result<(), CliError> {
    let sets = a.dataset.iter().map(|p| load_set(p)).collect::<Result<Vec<_>, _>>()?;
    let stories = match &a.stories {
        Some(p) => {
            let (items, warnings) = load_story_items(p).map_err(|e| CliError::Validation(e.to_string()))?;
            warnings.iter().for_each(|w| warn!("{w}"));
            items
        }
        None => Vec::new(),
    };
    let materials = Materials::new(sets, stories);
    materials.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    let state = AppState::open(materials, &a.store, a.snapshot_every).map_err(runtime)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(runtime)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port)).await.map_err(runtime)?;
        info!("listening on http://{}", listener.local_addr().map_err(runtime)?);
        anabench_service::serve(listener, state, a.origin.as_deref()).await.map_err(runtime)
    })
}

#[derive(Debug, Default, Serialize)]
struct ValidationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    problems: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stories: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verbal: Option<usize>,
    warnings: Vec<String>,
}

fn validate_cmd(a: &ValidateArgs) -> Result<(), CliError> {
    let mut report = ValidationReport::default();
    let mut failures = Vec::new();
    if let Some(path) = &a.problems {
        let (summary, entries) = solve_report(&load_set(path)?);
        for e in entries.iter().filter(|e| !e.unique || !e.matches) {
            failures.push(format!("{}: unique={} matches={}", e.id, e.unique, e.matches));
        }
        report.problems = Some(summary);
    }
    if let Some(path) = &a.stories {
        let (items, warnings) = load_story_items(path).map_err(|e| CliError::Validation(e.to_string()))?;
        report.warnings.extend(warnings.iter().map(ToString::to_string));
        report.stories = Some(items.len());
    }
    if let Some(path) = &a.verbal {
        let dataset = a.dataset.expect("clap requires --dataset");
        let load = load_verbal_dataset(path, dataset).map_err(|e| CliError::Validation(e.to_string()))?;
        report.warnings.extend(load.warnings.iter().map(ToString::to_string));
        report.verbal = Some(load.items.len());
    }
    report.warnings.iter().for_each(|w| warn!("{w}"));
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(runtime)?;
    bytes.push(b'\n');
    emit(None, &bytes)?;
    if failures.is_empty() {
        Ok(())
    } else {
        failures.iter().for_each(|f| eprintln!("{f}"));
        Err(CliError::Validation(format!("{} problems fail the oracle", failures.len())))
    }
}
