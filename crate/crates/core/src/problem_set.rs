//! Canonical problem-set file: a list of family-tagged problems plus
//! free-form metadata.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cell::{Family, ProblemId};
use crate::digitmat::DigitMatrixProblem;
use crate::letterstring::LetterStringProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Problem {
    DigitMatrix(DigitMatrixProblem),
    LetterString(LetterStringProblem),
}

impl Problem {
    /// Grouping labels attached to every record of the problem.
    pub fn labels(&self) -> BTreeMap<String, String> {
        let mut labels = BTreeMap::new();
        match self {
            Problem::DigitMatrix(p) => {
                labels.insert("rule_count".into(), p.rule_count().to_string());
                labels.insert("problem_type".into(), p.problem_type());
            }
            Problem::LetterString(p) => {
                labels.insert("stratum".into(), crate::letterstring::dataset::stratum(p));
                labels.insert("transformation".into(), p.transformation.name().into());
                labels.insert("generalization_count".into(), p.generalizations.len().to_string());
            }
        }
        labels
    }

    pub fn id(&self) -> &ProblemId {
        match self {
            Problem::DigitMatrix(p) => &p.id,
            Problem::LetterString(p) => &p.id,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Problem::DigitMatrix(_) => Family::DigitMatrix,
            Problem::LetterString(_) => Family::LetterString,
        }
    }

    pub fn as_digit_matrix(&self) -> Option<&DigitMatrixProblem> {
        match self {
            Problem::DigitMatrix(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_letter_string(&self) -> Option<&LetterStringProblem> {
        match self {
            Problem::LetterString(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProblemSet {
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub problems: Vec<Problem>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemSetError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid problem set {path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

impl ProblemSet {
    pub fn new(problems: Vec<Problem>) -> Self {
        ProblemSet { metadata: BTreeMap::new(), problems }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem sets serialize")
    }

    pub fn load(path: &Path) -> Result<Self, ProblemSetError> {
        let p = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ProblemSetError::Io { path: p.clone(), source })?;
        serde_json::from_str(&text).map_err(|source| ProblemSetError::Json { path: p, source })
    }

    pub fn save(&self, path: &Path) -> Result<(), ProblemSetError> {
        let p = path.display().to_string();
        std::fs::write(path, self.to_json() + "\n").map_err(|source| ProblemSetError::Io { path: p, source })
    }

    pub fn find(&self, id: &ProblemId) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id() == id)
    }
}

/// Derive a per-stream seed from a base seed and a label.
pub fn mix_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then one splitmix64 round.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
