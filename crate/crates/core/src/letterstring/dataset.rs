//! The letter-string problem set: four generalization strata plus the
//! real-world concept problems.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::generate::generate_letterstring_problem;
use super::{GeneralizationKind, LetterError, LetterStringProblem, LetterSubtype, TransformationKind};
use crate::problem_set::{mix_seed, Problem, ProblemSet};

#[derive(Debug, Clone, Copy)]
pub struct LetterDatasetSpec {
    pub seed: u64,
    /// Problems per stratum cell (100 in the full set).
    pub per_group: usize,
    /// Keep only the evaluation subset (half of every stratum cell).
    pub eval_subset: bool,
}

impl LetterDatasetSpec {
    pub fn full(seed: u64) -> Self {
        LetterDatasetSpec { seed, per_group: 100, eval_subset: false }
    }

    pub fn eval(seed: u64) -> Self {
        LetterDatasetSpec { seed, per_group: 100, eval_subset: true }
    }
}

/// Stratum label: "0-gen" .. "3-gen" or "real_world".
pub fn stratum(p: &LetterStringProblem) -> String {
    match p.domain {
        super::Domain::RealWorld { .. } => "real_world".to_string(),
        super::Domain::Letters => format!("{}-gen", p.generalizations.len()),
    }
}

fn random_subtype(n_gens: usize, rng: &mut ChaCha8Rng) -> LetterSubtype {
    let kind = *TransformationKind::ALL.choose(rng).unwrap();
    let gens: Vec<GeneralizationKind> = GeneralizationKind::ALL.choose_multiple(rng, n_gens).copied().collect();
    LetterSubtype::new(kind, gens, false)
}

fn emit(
    out: &mut Vec<Problem>,
    label: &str,
    index: usize,
    seed: u64,
    pick: impl FnOnce(&mut ChaCha8Rng) -> LetterSubtype,
) -> Result<(), LetterError> {
    let s = mix_seed(seed, &format!("{label}/{index}"));
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let subtype = pick(&mut rng);
    let mut p = generate_letterstring_problem(&subtype, rng.gen())?;
    p.id.instance = index as u32;
    out.push(Problem::LetterString(p));
    Ok(())
}

/// Build the letter-string set: `per_group` problems per transformation
/// (0-gen), per generalization (1-gen), `6 * per_group` random problems with
/// two and three generalizations, and `per_group` real-world problems per
/// applicable transformation.
pub fn build_letterstring_dataset(spec: &LetterDatasetSpec) -> Result<ProblemSet, LetterError> {
    let n = spec.per_group;
    let keep = if spec.eval_subset { n / 2 } else { n };
    let mut out = Vec::new();
    for (k, kind) in TransformationKind::ALL.into_iter().enumerate() {
        for i in 0..keep {
            emit(&mut out, "0-gen", k * n + i, spec.seed, |_| LetterSubtype::new(kind, vec![], false))?;
        }
    }
    for (g, gen) in GeneralizationKind::ALL.into_iter().enumerate() {
        for i in 0..keep {
            emit(&mut out, "1-gen", g * n + i, spec.seed, |rng| {
                LetterSubtype::new(*TransformationKind::ALL.choose(rng).unwrap(), vec![gen], false)
            })?;
        }
    }
    for gens in [2, 3] {
        let label = format!("{gens}-gen");
        for i in 0..6 * keep {
            emit(&mut out, &label, i, spec.seed, |rng| random_subtype(gens, rng))?;
        }
    }
    for (k, kind) in TransformationKind::REAL_WORLD.into_iter().enumerate() {
        for i in 0..keep {
            emit(&mut out, "real_world", k * n + i, spec.seed, |_| LetterSubtype::new(kind, vec![], true))?;
        }
    }
    let mut set = ProblemSet::new(out);
    set.metadata.insert("generator".into(), json!("letterstring"));
    set.metadata.insert("seed".into(), json!(spec.seed));
    set.metadata.insert("per_group".into(), json!(spec.per_group));
    set.metadata.insert("eval_subset".into(), json!(spec.eval_subset));
    Ok(set)
}
