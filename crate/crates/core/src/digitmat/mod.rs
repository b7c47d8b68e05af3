//! Digit Matrices: rule vocabulary, subtype taxonomy, problem generation,
//! distractor synthesis and dataset construction.

pub mod catalog;
pub mod dataset;
pub mod distractors;
pub mod generate;
pub mod rules;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cell::{AnswerKind, Cell, Grid, ProblemId};
use crate::render::answers_equivalent;

pub use catalog::{Subtype, SubtypeCatalog, SubtypeSpec};
pub use dataset::{build_dataset, instance_space, DatasetSpec};
pub use distractors::{generate_distractors, DistractorError};
pub use generate::{generate_problem, GenerateError};
pub use rules::{derive_answer, DeriveError, LogicOp, LogicRule, Orientation, RuleSet, TransformKind, TransformRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitMatrixProblem {
    pub id: ProblemId,
    pub subtype: String,
    pub grid: Grid,
    pub rules: RuleSet,
    pub answer: Cell,
    pub choices: Vec<Cell>,
    pub correct_choice: usize,
    pub kind: AnswerKind,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl DigitMatrixProblem {
    /// "1-rule" .. "5-rule" or "logic".
    pub fn problem_type(&self) -> String {
        match &self.rules {
            RuleSet::Logic { .. } => "logic".to_string(),
            RuleSet::Transformation { rules } => format!("{}-rule", rules.len()),
        }
    }

    pub fn rule_count(&self) -> usize {
        match &self.rules {
            RuleSet::Logic { .. } => 0,
            RuleSet::Transformation { rules } => rules.len(),
        }
    }

    /// Index of the first choice equivalent to `cell`.
    pub fn choice_index(&self, cell: &Cell) -> Option<usize> {
        self.choices.iter().position(|c| answers_equivalent(self.kind, c, cell))
    }

    pub fn is_correct(&self, cell: &Cell) -> bool {
        answers_equivalent(self.kind, &self.answer, cell)
    }
}
