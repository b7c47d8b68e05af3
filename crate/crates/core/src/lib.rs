//! Problem families, rule-induction oracle, scoring rules and statistics
//! for analogy benchmarks built around Digit Matrices, letter-string,
//! verbal and story analogies.

pub mod cell;
pub mod digitmat;
pub mod letterstring;
pub mod model;
pub mod problem_set;
pub mod record;
pub mod render;
pub mod semantic;
pub mod solver;
pub mod stats;

pub use cell::{AnswerKind, Cell, Family, Grid, ProblemId, Slot};
pub use problem_set::{Problem, ProblemSet};
pub use render::{answers_equivalent, parse_generated_answer, render_matrix_display, render_matrix_prompt};
pub use record::{prompt_hash, EvalMode, EvalRecord, RecordFlag};
