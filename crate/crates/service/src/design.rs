//! Experiment designs: which trials a session presents, in what order.

use std::collections::{BTreeMap, HashMap};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use anabench_core::digitmat::SubtypeCatalog;
use anabench_core::letterstring::dataset::stratum;
use anabench_core::letterstring::verify::verify_problem;
use anabench_core::letterstring::{GeneralizationKind, TransformationKind};
use anabench_core::problem_set::mix_seed;
use anabench_core::semantic::{Distance, StoryItem, StoryOrder};
use anabench_core::solver::solve;
use anabench_core::{answers_equivalent, Problem, ProblemId, ProblemSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    DigitMat32,
    DigitMat42Ordered,
    LetterString28,
    Story18,
}

impl Experiment {
    pub const ALL: [Experiment; 4] =
        [Experiment::DigitMat32, Experiment::DigitMat42Ordered, Experiment::LetterString28, Experiment::Story18];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DigitMat32 => "DigitMat32",
            Experiment::DigitMat42Ordered => "DigitMat42Ordered",
            Experiment::LetterString28 => "LetterString28",
            Experiment::Story18 => "Story18",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DesignError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("dataset has no problems for {0}")]
    Missing(String),
    #[error("dataset problem {0} fails oracle validation")]
    Invalid(String),
}

/// One presented trial. Content is looked up in the loaded materials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trial {
    DigitMatrix { problem: ProblemId },
    LetterString { problem: ProblemId },
    Story { item: usize, order: StoryOrder },
}

/// Pre-generated problems and story items a service draws trials from.
#[derive(Debug, Clone, Default)]
pub struct Materials {
    problems: Vec<Problem>,
    index: HashMap<ProblemId, usize>,
    pub stories: Vec<StoryItem>,
}

impl Materials {
    pub fn new(sets: impl IntoIterator<Item = ProblemSet>, stories: Vec<StoryItem>) -> Self {
        let problems: Vec<Problem> = sets.into_iter().flat_map(|s| s.problems).collect();
        let index = problems.iter().enumerate().map(|(i, p)| (p.id().clone(), i)).collect();
        Materials { problems, index, stories }
    }

    /// Check every problem against the oracle: the solver's preferred
    /// answer for matrices, re-derivation for letter strings.
    pub fn validate(&self) -> Result<(), DesignError> {
        for p in &self.problems {
            let ok = match p {
                Problem::DigitMatrix(dm) => solve(&dm.grid, None)
                    .ok()
                    .and_then(|r| r.answers.into_iter().next())
                    .is_some_and(|(cell, _)| answers_equivalent(dm.kind, &dm.answer, &cell)),
                Problem::LetterString(ls) => verify_problem(ls),
            };
            if !ok {
                return Err(DesignError::Invalid(p.id().to_string()));
            }
        }
        Ok(())
    }

    pub fn problem(&self, id: &ProblemId) -> Option<&Problem> {
        self.index.get(id).map(|&i| &self.problems[i])
    }

    pub fn problems(&self) -> &[Problem] {
        &self.problems
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: impl Iterator<Item = &'a T>, what: impl Fn() -> String) -> Result<&'a T, DesignError>
where
    T: 'a,
{
    items.choose(rng).ok_or_else(|| DesignError::Missing(what()))
}

fn matrix_trials(m: &Materials, rng: &mut ChaCha8Rng, subtypes: &[String]) -> Result<Vec<Trial>, DesignError> {
    subtypes
        .iter()
        .map(|name| {
            let p = pick(rng, m.problems.iter().filter_map(Problem::as_digit_matrix).filter(|p| &p.subtype == name), || {
                format!("subtype {name}")
            })?;
            Ok(Trial::DigitMatrix { problem: p.id.clone() })
        })
        .collect()
}

fn letter_trials(m: &Materials, rng: &mut ChaCha8Rng) -> Result<Vec<Trial>, DesignError> {
    let letters: Vec<_> = m.problems.iter().filter_map(Problem::as_letter_string).collect();
    let in_stratum = |s: &'static str| letters.iter().copied().filter(move |p| stratum(p) == s);
    let mut out = Vec::with_capacity(28);
    for t in TransformationKind::ALL {
        let p = pick(rng, in_stratum("0-gen").filter(|p| p.transformation == t), || format!("0-gen {}", t.name()))?;
        out.push(p);
    }
    for g in GeneralizationKind::ALL {
        let p = pick(rng, in_stratum("1-gen").filter(|p| p.generalizations.contains(&g)), || format!("1-gen {}", g.name()))?;
        out.push(p);
    }
    for s in ["2-gen", "3-gen"] {
        let chosen = in_stratum(s).choose_multiple(rng, 6);
        if chosen.len() < 6 {
            return Err(DesignError::Missing(format!("six {s} problems")));
        }
        out.extend(chosen);
    }
    for t in TransformationKind::REAL_WORLD {
        let p = pick(rng, in_stratum("real_world").filter(|p| p.transformation == t), || format!("real-world {}", t.name()))?;
        out.push(p);
    }
    Ok(out.into_iter().map(|p| Trial::LetterString { problem: p.id.clone() }).collect())
}

fn story_trials(m: &Materials, rng: &mut ChaCha8Rng) -> Result<Vec<Trial>, DesignError> {
    let mut groups: BTreeMap<&str, [Option<usize>; 2]> = BTreeMap::new();
    for (i, s) in m.stories.iter().enumerate() {
        let slot = if s.condition == Distance::Near { 0 } else { 1 };
        groups.entry(&s.group_id).or_default()[slot] = Some(i);
    }
    let complete: Vec<[usize; 2]> = groups.values().filter_map(|g| Some([g[0]?, g[1]?])).collect();
    if complete.len() < 18 {
        return Err(DesignError::Missing("18 story groups with near and far items".into()));
    }
    let mut chosen = complete.choose_multiple(rng, 18).copied().collect::<Vec<_>>();
    chosen.shuffle(rng);
    let mut near = [true; 18];
    near[9..].fill(false);
    near.shuffle(rng);
    Ok(chosen
        .into_iter()
        .zip(near)
        .map(|(g, is_near)| Trial::Story {
            item: if is_near { g[0] } else { g[1] },
            order: if rng.gen_bool(0.5) { StoryOrder::CorrectFirst } else { StoryOrder::IncorrectFirst },
        })
        .collect())
}

/// Materialize the trial order for one session.
pub fn build_trials(experiment: Experiment, materials: &Materials, seed: u64) -> Result<Vec<Trial>, DesignError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, experiment.name()));
    let catalog = SubtypeCatalog::new();
    let names = |v: Vec<anabench_core::digitmat::Subtype>| v.into_iter().map(|s| s.name).collect::<Vec<_>>();
    match experiment {
        Experiment::DigitMat32 => {
            let mut t = matrix_trials(materials, &mut rng, &names(catalog.exp1()))?;
            t.shuffle(&mut rng);
            Ok(t)
        }
        Experiment::DigitMat42Ordered => matrix_trials(materials, &mut rng, &names(catalog.exp2())),
        Experiment::LetterString28 => {
            let mut t = letter_trials(materials, &mut rng)?;
            t.shuffle(&mut rng);
            Ok(t)
        }
        Experiment::Story18 => story_trials(materials, &mut rng),
    }
}
