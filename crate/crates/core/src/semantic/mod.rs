//! Four-term verbal analogies and story analogies: loading, prompts,
//! scoring and response parsing.

pub mod story;
pub mod verbal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use story::{
    load_story_items, parse_story_choice, render_story_prompt, story_comparisons, validate_story_items,
    StoryChoice, StoryComparison, StoryItem, StoryOrder,
};
pub use verbal::{
    load_verbal_dataset, render_verbal_candidate, render_verbal_prompt, score_verbal_item, VerbalChoice,
    VerbalDataset, VerbalItem, VerbalLoad, VerbalScore,
};

/// Semantic distance between source and target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Near,
    Far,
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Distance::Near => "near",
            Distance::Far => "far",
        })
    }
}

impl std::str::FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "near" => Ok(Distance::Near),
            "far" => Ok(Distance::Far),
            other => Err(format!("unknown distance {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SemanticError {
    #[error("row {row}, field {field:?}: {reason}")]
    Schema { row: usize, field: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl SemanticError {
    pub(crate) fn schema(row: usize, field: &str, reason: impl Into<String>) -> Self {
        SemanticError::Schema { row, field: field.to_string(), reason: reason.into() }
    }
}

/// Non-fatal findings while loading a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetWarning {
    CountMismatch { group: String, expected: usize, found: usize },
}

impl std::fmt::Display for DatasetWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetWarning::CountMismatch { group, expected, found } => {
                write!(f, "{group}: expected {expected} items, found {found}")
            }
        }
    }
}
