//! Letter-string analogies: six transformations, six generalizations and
//! real-world concept sequences.

pub mod dataset;
pub mod generate;
pub mod prompt;
pub mod transform;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::ProblemId;

pub use dataset::{build_letterstring_dataset, LetterDatasetSpec};
pub use generate::{derive_answer, generate_letterstring_problem, generate_target, Instantiation};
pub use prompt::{parse_letterstring_answer, render_letterstring_prompt, PromptFormat};
pub use transform::apply_transformation;
pub use verify::verify_problem;

/// Concept sequences used as real-world targets.
pub const REAL_WORLD: [[&str; 4]; 5] = [
    ["cold", "cool", "warm", "hot"],
    ["love", "like", "dislike", "hate"],
    ["jack", "queen", "king", "ace"],
    ["penny", "nickel", "dime", "quarter"],
    ["second", "minute", "hour", "day"],
];

/// Letter used by the interleaved-distractor generalization.
pub const INTERLEAVE: &str = "x";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LetterError {
    #[error("precondition of {kind} violated: {reason}")]
    PreconditionViolated { kind: TransformationKind, reason: String },
    #[error("sequence runs off the alphabet")]
    InfeasibleAlphabetRange,
    #[error("generalization interpretations disagree")]
    DerivationConflict,
    #[error("unknown subtype {0:?}")]
    UnknownSubtype(String),
    #[error("no feasible instance found for seed {0}")]
    GenerationExhausted(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformationKind {
    Extend,
    Successor,
    Predecessor,
    RemoveRedundant,
    FixAlphabetic,
    Sort,
}

impl TransformationKind {
    pub const ALL: [TransformationKind; 6] = [
        TransformationKind::Extend,
        TransformationKind::Successor,
        TransformationKind::Predecessor,
        TransformationKind::RemoveRedundant,
        TransformationKind::FixAlphabetic,
        TransformationKind::Sort,
    ];

    /// Kinds used with real-world concept targets.
    pub const REAL_WORLD: [TransformationKind; 4] = [
        TransformationKind::Extend,
        TransformationKind::Successor,
        TransformationKind::Predecessor,
        TransformationKind::Sort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformationKind::Extend => "extend",
            TransformationKind::Successor => "successor",
            TransformationKind::Predecessor => "predecessor",
            TransformationKind::RemoveRedundant => "remove_redundant",
            TransformationKind::FixAlphabetic => "fix_alphabetic",
            TransformationKind::Sort => "sort",
        }
    }

    /// Length of the underlying alphabetic sequence before the transformation.
    pub fn base_length(self) -> usize {
        match self {
            TransformationKind::Extend | TransformationKind::Successor | TransformationKind::Predecessor => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for TransformationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformationKind {
    type Err = LetterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| LetterError::UnknownSubtype(s.to_string()))
    }
}

/// Generalizations in their canonical application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralizationKind {
    LargerInterval,
    LongerTarget,
    Grouping,
    InterleavedDistractors,
    ReversedOrder,
    LetterToNumber,
}

impl GeneralizationKind {
    pub const ALL: [GeneralizationKind; 6] = [
        GeneralizationKind::LargerInterval,
        GeneralizationKind::LongerTarget,
        GeneralizationKind::Grouping,
        GeneralizationKind::InterleavedDistractors,
        GeneralizationKind::ReversedOrder,
        GeneralizationKind::LetterToNumber,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneralizationKind::LargerInterval => "interval",
            GeneralizationKind::LongerTarget => "length",
            GeneralizationKind::Grouping => "grouping",
            GeneralizationKind::InterleavedDistractors => "interleaved",
            GeneralizationKind::ReversedOrder => "reversed",
            GeneralizationKind::LetterToNumber => "number",
        }
    }
}

impl fmt::Display for GeneralizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneralizationKind {
    type Err = LetterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| LetterError::UnknownSubtype(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Letters,
    RealWorld { sequence: usize },
}

/// What a letter-string subtype fixes before sampling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LetterSubtype {
    pub transformation: TransformationKind,
    /// Kept in canonical order.
    pub generalizations: Vec<GeneralizationKind>,
    pub real_world: bool,
}

impl LetterSubtype {
    pub fn new(transformation: TransformationKind, mut generalizations: Vec<GeneralizationKind>, real_world: bool) -> Self {
        generalizations.sort();
        generalizations.dedup();
        LetterSubtype { transformation, generalizations, real_world }
    }
}

/// "successor", "sort+grouping+reversed", "extend@real_world".
impl fmt::Display for LetterSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.transformation)?;
        for g in &self.generalizations {
            write!(f, "+{g}")?;
        }
        if self.real_world {
            write!(f, "@real_world")?;
        }
        Ok(())
    }
}

impl FromStr for LetterSubtype {
    type Err = LetterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, real_world) = match s.strip_suffix("@real_world") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let mut parts = body.split('+');
        let transformation = parts.next().unwrap_or("").parse()?;
        let generalizations = parts.map(str::parse).collect::<Result<Vec<_>, _>>()?;
        if real_world && !generalizations.is_empty() {
            return Err(LetterError::UnknownSubtype(s.to_string()));
        }
        Ok(LetterSubtype::new(transformation, generalizations, real_world))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterStringProblem {
    pub id: ProblemId,
    pub source_left: Vec<String>,
    pub source_right: Vec<String>,
    pub target_stem: Vec<String>,
    pub answer: Vec<String>,
    pub transformation: TransformationKind,
    pub generalizations: Vec<GeneralizationKind>,
    pub domain: Domain,
    /// Sampled parameters of the source pair.
    pub source: Instantiation,
    /// Sampled parameters of the target, before generalizations.
    pub target: Instantiation,
}

impl LetterStringProblem {
    pub fn subtype(&self) -> LetterSubtype {
        LetterSubtype::new(self.transformation, self.generalizations.clone(), matches!(self.domain, Domain::RealWorld { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtype_names_round_trip() {
        for s in ["successor", "sort+grouping+reversed", "extend@real_world", "fix_alphabetic+interval+length+number"] {
            assert_eq!(s.parse::<LetterSubtype>().unwrap().to_string(), s);
        }
        let s: LetterSubtype = "sort+reversed+grouping".parse().unwrap();
        assert_eq!(s.to_string(), "sort+grouping+reversed");
        assert!("nope".parse::<LetterSubtype>().is_err());
        assert!("sort+grouping@real_world".parse::<LetterSubtype>().is_err());
    }
}
