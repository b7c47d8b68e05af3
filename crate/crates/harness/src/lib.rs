//! Model clients, scoring, and experiment drivers for running analogy
//! problem sets against language models.

pub mod cache;
pub mod client;
pub mod experiments;
pub mod problem_solving;
pub mod scoring;
pub mod scripted;

pub use anabench_core::prompt_hash;
pub use cache::CachedClient;
pub use client::{HttpClient, RetryPolicy};
pub use experiments::{
    progressive_sequence, run_digitmat_experiment, run_isolated_experiment, run_letterstring_experiment,
    run_progressive_experiment, run_progressive_runs, run_story_experiment, run_verbal_experiment, ContextPolicy,
    ProgressiveRun, RecursiveContext, RunConfig, RunMode, WindowGuard,
};
pub use problem_solving::export_problem_solving_prompts;
pub use scoring::{score_generative, score_multiple_choice};
pub use scripted::{make_scripted_model, ScriptedModel, Strategy};
