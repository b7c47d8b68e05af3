//! Seeded generation of single Digit Matrices problems.
//!
//! A candidate grid is sampled from the subtype's rule template, its
//! answer is derived from the rules, and the candidate is kept only when
//! the exhaustive solver agrees on a single completion.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::catalog::{OneRule, Subtype, SubtypeSpec};
use super::distractors::generate_distractors;
use super::rules::{derive_answer, LogicOp, LogicRule, Orientation, RuleSet, TransformKind, TransformRule};
use super::DigitMatrixProblem;
use crate::cell::{AnswerKind, Cell, Family, Grid, ProblemId};
use crate::render::answers_equivalent;
use crate::solver::solve;

/// Candidates tried per call before giving up.
pub const MAX_ATTEMPTS: usize = 500;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("no unambiguous instance of {subtype} found for seed {seed} within {attempts} attempts")]
    GenerationExhausted { subtype: String, seed: u64, attempts: usize },
}

/// Template for one transformation slot.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotTemplate {
    pub kind: TransformKind,
    pub orientation: Orientation,
    /// Signed step for progressions.
    pub delta: i8,
    /// Dist3 direction: rows rotate left when true.
    pub left: bool,
}

/// Fill one slot of a 3×3 digit array from a template and its parameters.
///
/// `values` holds the line digits (Constant), the three distinct digits
/// (Dist3), or `[base]` followed by the line-offset permutation
/// (Progression, base is the first value of the offset-0 line).
pub(crate) fn fill_slot(t: SlotTemplate, values: &[u8]) -> [[u8; 3]; 3] {
    let mut out = [[0u8; 3]; 3];
    for line in 0..3 {
        for pos in 0..3 {
            let v = match t.kind {
                TransformKind::Constant => values[line],
                TransformKind::Dist3 => {
                    let i = if t.left { (pos + line) % 3 } else { (pos + 3 - line) % 3 };
                    values[i]
                }
                TransformKind::Progression => {
                    let base = values[0] as i16;
                    let offset = values[1 + line] as i16;
                    (base + t.delta as i16 * (offset + pos as i16)) as u8
                }
            };
            let (r, c) = t.orientation.cell(line, pos);
            out[r][c] = v;
        }
    }
    out
}

/// Feasible progression bases: the sequence spans 4 steps from the base.
pub(crate) fn progression_bases(delta: i8) -> std::ops::RangeInclusive<u8> {
    let span = 4 * delta.unsigned_abs();
    if delta > 0 {
        0..=9 - span
    } else {
        span..=9
    }
}

fn sample_slot(t: SlotTemplate, rng: &mut ChaCha8Rng) -> (Vec<u8>, [[u8; 3]; 3]) {
    let values: Vec<u8> = match t.kind {
        TransformKind::Constant => (0..3).map(|_| rng.gen_range(0..10)).collect(),
        TransformKind::Dist3 => {
            let mut digits: Vec<u8> = (0..10).collect();
            digits.shuffle(rng);
            digits.truncate(3);
            digits
        }
        TransformKind::Progression => {
            let base = rng.gen_range(progression_bases(t.delta));
            let mut offsets = vec![0u8, 1, 2];
            offsets.shuffle(rng);
            std::iter::once(base).chain(offsets).collect()
        }
    };
    let filled = fill_slot(t, &values);
    (values, filled)
}

fn random_orientation(rng: &mut ChaCha8Rng) -> Orientation {
    if rng.gen_bool(0.5) {
        Orientation::RowWise
    } else {
        Orientation::ColWise
    }
}

fn random_delta(magnitude: Option<i8>, rng: &mut ChaCha8Rng) -> i8 {
    let m = magnitude.unwrap_or_else(|| if rng.gen_bool(0.5) { 1 } else { 2 });
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn slot_templates(spec: &SubtypeSpec, rng: &mut ChaCha8Rng) -> Vec<SlotTemplate> {
    let t = |kind, orientation, delta, left| SlotTemplate { kind, orientation, delta, left };
    match spec {
        SubtypeSpec::OneRule(one) => vec![match one {
            OneRule::ConstantRow => t(TransformKind::Constant, Orientation::RowWise, 0, true),
            OneRule::ConstantCol => t(TransformKind::Constant, Orientation::ColWise, 0, true),
            OneRule::Dist3Left => t(TransformKind::Dist3, Orientation::RowWise, 0, true),
            OneRule::Dist3Right => t(TransformKind::Dist3, Orientation::RowWise, 0, false),
            OneRule::Progression1 => {
                let o = random_orientation(rng);
                t(TransformKind::Progression, o, random_delta(Some(1), rng), true)
            }
            OneRule::Progression2 => {
                let o = random_orientation(rng);
                t(TransformKind::Progression, o, random_delta(Some(2), rng), true)
            }
        }],
        SubtypeSpec::MultiRule(kinds) => {
            let mut kinds = kinds.clone();
            kinds.shuffle(rng);
            kinds
                .into_iter()
                .map(|kind| {
                    let o = random_orientation(rng);
                    let delta = if kind == TransformKind::Progression { random_delta(None, rng) } else { 0 };
                    t(kind, o, delta, rng.gen_bool(0.5))
                })
                .collect()
        }
        SubtypeSpec::Logic { .. } => unreachable!("logic subtypes have no slot templates"),
    }
}

fn sample_transformation(spec: &SubtypeSpec, rng: &mut ChaCha8Rng) -> ([Cell; 9], RuleSet) {
    let templates = slot_templates(spec, rng);
    let mut digits: [Vec<u8>; 9] = Default::default();
    let mut rules = Vec::with_capacity(templates.len());
    for (slot, t) in templates.into_iter().enumerate() {
        let (values, filled) = sample_slot(t, rng);
        for (i, cell) in digits.iter_mut().enumerate() {
            cell.push(filled[i / 3][i % 3]);
        }
        let values = match t.kind {
            // Record the first value of each line.
            TransformKind::Progression => (0..3).map(|l| {
                let (r, c) = t.orientation.cell(l, 0);
                filled[r][c]
            }).collect(),
            TransformKind::Dist3 => (0..3).map(|p| {
                let (r, c) = t.orientation.cell(0, p);
                filled[r][c]
            }).collect(),
            TransformKind::Constant => values,
        };
        rules.push(TransformRule { kind: t.kind, orientation: t.orientation, delta: t.delta, slot, values });
    }
    let cells = digits.map(|d| Cell::from_digits(&d));
    (cells, RuleSet::Transformation { rules })
}

fn random_subset(universe: &[u8], rng: &mut ChaCha8Rng) -> u16 {
    universe.iter().filter(|_| rng.gen_bool(0.5)).fold(0, |m, &d| m | (1 << d))
}

/// Sample masks for the 3×3 grid obeying `op` along rows and columns with
/// the derived set in line `target`.
fn sample_logic_masks(op: LogicOp, target: usize, universe: &[u8], rng: &mut ChaCha8Rng) -> [[u16; 3]; 3] {
    let operands: Vec<usize> = (0..3).filter(|&i| i != target).collect();
    let mut m = [[0u16; 3]; 3];
    for &r in &operands {
        for &c in &operands {
            m[r][c] = random_subset(universe, rng);
        }
    }
    let (p, q) = (operands[0], operands[1]);
    for &i in &operands {
        m[i][target] = op.apply(m[i][p], m[i][q]);
        m[target][i] = op.apply(m[p][i], m[q][i]);
    }
    m[target][target] = op.apply(m[target][p], m[target][q]);
    m
}

fn sample_logic(op: LogicOp, target: usize, aligned: bool, rng: &mut ChaCha8Rng) -> Option<([Cell; 9], RuleSet)> {
    let size = rng.gen_range(3..=4);
    let mut pool: Vec<u8> = (0..10).collect();
    pool.shuffle(rng);
    let layout: Vec<u8> = pool[..size].to_vec();
    let m = sample_logic_masks(op, target, &layout, rng);
    let flat: Vec<u16> = m.iter().flatten().copied().collect();
    if flat.iter().any(|&x| x == 0) {
        return None;
    }
    // Every layout digit must be visible outside the missing cell.
    let visible = flat[..8].iter().fold(0u16, |a, &x| a | x);
    if layout.iter().any(|&d| visible & (1 << d) == 0) {
        return None;
    }
    let permutation: Vec<Vec<usize>> = (0..9)
        .map(|_| {
            let mut p: Vec<usize> = (0..size).collect();
            if !aligned {
                p.shuffle(rng);
            }
            p
        })
        .collect();
    let rule = LogicRule { op, target, orientation: Orientation::Both, aligned, layout, permutation };
    let cells: Vec<Cell> = flat.iter().enumerate().map(|(i, &x)| rule.render(x, i)).collect();
    let cells: [Cell; 9] = cells.try_into().ok()?;
    Some((cells, RuleSet::Logic { rule }))
}

fn sample(subtype: &Subtype, rng: &mut ChaCha8Rng) -> Option<([Cell; 9], RuleSet)> {
    match &subtype.spec {
        SubtypeSpec::Logic { op, target, aligned } => sample_logic(*op, target.index(), *aligned, rng),
        spec => Some(sample_transformation(spec, rng)),
    }
}

/// Generate one problem of `subtype`, deterministically from `seed`.
pub fn generate_problem(subtype: &Subtype, seed: u64) -> Result<DigitMatrixProblem, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if subtype.is_logic() { AnswerKind::DigitSet } else { AnswerKind::OrderedDigits };
    for _ in 0..MAX_ATTEMPTS {
        let Some((full, rules)) = sample(subtype, &mut rng) else { continue };
        let missing = full[8].clone();
        let Ok(grid) = Grid::from_full(full) else { continue };
        if let RuleSet::Logic { rule } = &rules {
            // A permuted grid that happens to look aligned is not permuted.
            if !rule.aligned && super::rules::aligned_layout(&grid).is_some() {
                continue;
            }
        }
        let Ok(answer) = derive_answer(&grid, &rules) else { continue };
        if !answers_equivalent(kind, &answer, &missing) {
            continue;
        }
        match solve(&grid, None) {
            Ok(r) if r.unique && answers_equivalent(kind, &r.answers[0].0, &answer) => {}
            _ => continue,
        }
        let distractor_seed = rng.gen::<u64>();
        let Ok(distractors) = generate_distractors(&grid, &answer, &rules, distractor_seed) else { continue };
        let mut choices = distractors;
        let correct_choice = rng.gen_range(0..=choices.len());
        choices.insert(correct_choice, answer.clone());
        let mut metadata = BTreeMap::new();
        metadata.insert("problem_type".to_string(), subtype.problem_type().into());
        metadata.insert("rule_count".to_string(), subtype.rule_count().into());
        return Ok(DigitMatrixProblem {
            id: ProblemId { family: Family::DigitMatrix, subtype: subtype.name.clone(), instance: 0, seed },
            subtype: subtype.name.clone(),
            grid,
            rules,
            answer,
            choices,
            correct_choice,
            kind,
            metadata,
        });
    }
    Err(GenerateError::GenerationExhausted { subtype: subtype.name.clone(), seed, attempts: MAX_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitmat::catalog::SubtypeCatalog;
    use crate::digitmat::rules::aligned_layout;

    #[test]
    fn deterministic_per_seed() {
        let cat = SubtypeCatalog::new();
        for s in cat.all().step_by(5) {
            let a = serde_json::to_string(&generate_problem(s, 42).unwrap()).unwrap();
            let b = serde_json::to_string(&generate_problem(s, 42).unwrap()).unwrap();
            assert_eq!(a, b, "{}", s.name);
        }
    }

    #[test]
    fn cell_width_matches_rule_count() {
        let cat = SubtypeCatalog::new();
        for s in cat.all().filter(|s| !s.is_logic()) {
            for seed in 0..5 {
                let p = generate_problem(s, seed).unwrap();
                assert_eq!(p.grid.uniform_width(), Some(s.rule_count() as usize), "{}", s.name);
                assert_eq!(p.answer.len(), s.rule_count() as usize);
            }
        }
    }

    #[test]
    fn worked_dist3_is_left_rotation() {
        let t = SlotTemplate { kind: TransformKind::Dist3, orientation: Orientation::RowWise, delta: 0, left: true };
        assert_eq!(fill_slot(t, &[6, 2, 4]), [[6, 2, 4], [2, 4, 6], [4, 6, 2]]);
    }

    #[test]
    fn worked_progression_layout() {
        let t = SlotTemplate { kind: TransformKind::Progression, orientation: Orientation::RowWise, delta: 2, left: true };
        assert_eq!(fill_slot(t, &[1, 1, 0, 2]), [[3, 5, 7], [1, 3, 5], [5, 7, 9]]);
    }

    #[test]
    fn logic_layouts() {
        let cat = SubtypeCatalog::new();
        for s in &cat.logic {
            for seed in 0..10 {
                let p = generate_problem(s, seed).unwrap();
                let aligned = s.name.contains("aligned");
                assert_eq!(aligned_layout(&p.grid).is_some(), aligned, "{} seed {seed}", s.name);
                assert!(p.answer.digits().count() > 0);
                assert_eq!(p.kind, AnswerKind::DigitSet);
            }
        }
    }
}
