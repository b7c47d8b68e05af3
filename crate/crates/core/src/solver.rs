//! Exhaustive rule-induction oracle for digit matrices.
//!
//! The solver does not reuse the generator's formulas. For every hypothesis
//! in the rule grammar it tries every possible content of the missing cell
//! (each digit per slot for transformation grids, each subset of the
//! visible digits for logic grids) and keeps the completions under which the
//! whole 3×3 grid satisfies the hypothesis.
//!
//! Grammar:
//! - transformation grids (uniform width, no blanks): per slot, constant,
//!   distribution-of-3 or progression with step ±1/±2, each row- or
//!   column-wise;
//! - logic grids (no digit repeated inside a cell): OR with the union in
//!   any line, AND and XOR with the derived set in the last line, each
//!   along rows, columns, or both. When a rule holds along both, only the
//!   combined interpretation is reported.
//!
//! Empty completions are never proposed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::{AnswerKind, Cell, Grid};
use crate::digitmat::rules::{render_set, LogicOp, Orientation, TransformKind};
use crate::render::answers_equivalent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyHint {
    Transformation,
    Logic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotHypothesis {
    pub kind: TransformKind,
    pub orientation: Orientation,
    pub delta: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Interpretation {
    Transformation { slots: Vec<SlotHypothesis> },
    Logic { op: LogicOp, target: usize, orientation: Orientation, aligned: bool },
}

impl Interpretation {
    pub fn answer_kind(&self) -> AnswerKind {
        match self {
            Interpretation::Transformation { .. } => AnswerKind::OrderedDigits,
            Interpretation::Logic { .. } => AnswerKind::DigitSet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub answers: Vec<(Cell, Interpretation)>,
    pub unique: bool,
}

impl SolveResult {
    /// The agreed completion, if all interpretations concur.
    pub fn answer(&self) -> Option<&Cell> {
        if self.unique {
            self.answers.first().map(|(c, _)| c)
        } else {
            None
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("no rule in the grammar explains the grid")]
    NoConsistentRule,
}

const SLOT_HYPOTHESES: [(TransformKind, i8); 6] = [
    (TransformKind::Constant, 0),
    (TransformKind::Dist3, 0),
    (TransformKind::Progression, -2),
    (TransformKind::Progression, -1),
    (TransformKind::Progression, 1),
    (TransformKind::Progression, 2),
];

fn lines<T: Copy>(full: &[[T; 3]; 3], o: Orientation) -> [[T; 3]; 3] {
    match o {
        Orientation::ColWise => std::array::from_fn(|c| std::array::from_fn(|r| full[r][c])),
        _ => *full,
    }
}

fn line_ok(kind: TransformKind, delta: i8, line: [u8; 3]) -> bool {
    match kind {
        TransformKind::Constant => line[0] == line[1] && line[1] == line[2],
        TransformKind::Dist3 => line[0] != line[1] && line[1] != line[2] && line[0] != line[2],
        TransformKind::Progression => {
            let d = delta as i16;
            line[1] as i16 - line[0] as i16 == d && line[2] as i16 - line[1] as i16 == d
        }
    }
}

fn grid_satisfies(full: &[[u8; 3]; 3], h: SlotHypothesis) -> bool {
    let ls = lines(full, h.orientation);
    if !ls.iter().all(|l| line_ok(h.kind, h.delta, *l)) {
        return false;
    }
    if h.kind == TransformKind::Dist3 {
        let mut sets = ls.iter().map(|l| {
            let mut s = *l;
            s.sort_unstable();
            s
        });
        let first = sets.next().unwrap();
        return sets.all(|s| s == first);
    }
    true
}

/// Completions of one slot for each hypothesis that explains it.
fn slot_options(grid: &Grid, slot: usize) -> Vec<(u8, SlotHypothesis)> {
    let mut full = [[0u8; 3]; 3];
    for (r, row) in full.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            if let Some(cell) = grid.get(r, c) {
                *v = cell.slots()[slot].digit().expect("no blanks in transformation grids");
            }
        }
    }
    let mut out = Vec::new();
    for (kind, delta) in SLOT_HYPOTHESES {
        for orientation in [Orientation::RowWise, Orientation::ColWise] {
            let h = SlotHypothesis { kind, orientation, delta };
            for d in 0..=9u8 {
                full[2][2] = d;
                if grid_satisfies(&full, h) {
                    out.push((d, h));
                }
            }
        }
    }
    out
}

fn solve_transformation(grid: &Grid) -> Vec<(Cell, Interpretation)> {
    let Some(width) = grid.uniform_width() else {
        return Vec::new();
    };
    if grid.visible().iter().any(Cell::has_blank) {
        return Vec::new();
    }
    let per_slot: Vec<_> = (0..width).map(|s| slot_options(grid, s)).collect();
    if per_slot.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    // Cartesian product over slots.
    let mut acc: Vec<(Vec<u8>, Vec<SlotHypothesis>)> = vec![(Vec::new(), Vec::new())];
    for options in &per_slot {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for (digits, hyps) in &acc {
            for &(d, h) in options {
                let mut digits = digits.clone();
                let mut hyps = hyps.clone();
                digits.push(d);
                hyps.push(h);
                next.push((digits, hyps));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(digits, slots)| (Cell::from_digits(&digits), Interpretation::Transformation { slots }))
        .collect()
}

fn logic_holds(m: &[[u16; 3]; 3], op: LogicOp, target: usize, o: Orientation) -> bool {
    let (p, q) = match target {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let check = |ls: [[u16; 3]; 3]| ls.iter().all(|l| op.apply(l[p], l[q]) == l[target]);
    match o {
        Orientation::RowWise => check(lines(m, Orientation::RowWise)),
        Orientation::ColWise => check(lines(m, Orientation::ColWise)),
        Orientation::Both => check(lines(m, Orientation::RowWise)) && check(lines(m, Orientation::ColWise)),
    }
}

fn solve_logic(grid: &Grid) -> Vec<(Cell, Interpretation)> {
    if !grid.visible().iter().all(Cell::digits_distinct) {
        return Vec::new();
    }
    let mut m = [[0u16; 3]; 3];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            if let Some(cell) = grid.get(r, c) {
                *v = cell.digit_mask();
            }
        }
    }
    let universe = grid.visible().iter().fold(0u16, |u, c| u | c.digit_mask());
    let subsets: Vec<u16> = (1..=universe).filter(|s| s & !universe == 0).collect();
    let aligned = crate::digitmat::rules::aligned_layout(grid).is_some();

    let mut out = Vec::new();
    for op in LogicOp::ALL {
        let targets: &[usize] = if op == LogicOp::Or { &[0, 1, 2] } else { &[2] };
        for &target in targets {
            let mut candidates = |o: Orientation| -> Vec<u16> {
                subsets
                    .iter()
                    .copied()
                    .filter(|&s| {
                        m[2][2] = s;
                        logic_holds(&m, op, target, o)
                    })
                    .collect()
            };
            let both = candidates(Orientation::Both);
            let chosen: Vec<(Orientation, Vec<u16>)> = if !both.is_empty() {
                vec![(Orientation::Both, both)]
            } else {
                vec![
                    (Orientation::RowWise, candidates(Orientation::RowWise)),
                    (Orientation::ColWise, candidates(Orientation::ColWise)),
                ]
            };
            for (orientation, sets) in chosen {
                for s in sets {
                    out.push((
                        render_set(grid, s),
                        Interpretation::Logic { op, target, orientation, aligned },
                    ));
                }
            }
        }
    }
    out
}

fn agree(a: &(Cell, Interpretation), b: &(Cell, Interpretation)) -> bool {
    let kind = match (&a.1, &b.1) {
        (Interpretation::Logic { .. }, Interpretation::Logic { .. }) => AnswerKind::DigitSet,
        _ => AnswerKind::OrderedDigits,
    };
    answers_equivalent(kind, &a.0, &b.0)
}

/// Every interpretation consistent with the eight visible cells, with its
/// completion of the missing cell.
pub fn solve(grid: &Grid, hint: Option<FamilyHint>) -> Result<SolveResult, SolveError> {
    let mut answers = Vec::new();
    if hint != Some(FamilyHint::Logic) {
        answers.extend(solve_transformation(grid));
    }
    if hint != Some(FamilyHint::Transformation) {
        answers.extend(solve_logic(grid));
    }
    if answers.is_empty() {
        return Err(SolveError::NoConsistentRule);
    }
    let unique = answers.iter().all(|a| agree(a, &answers[0]));
    Ok(SolveResult { answers, unique })
}

pub fn is_ambiguous(grid: &Grid) -> Result<bool, SolveError> {
    solve(grid, None).map(|r| !r.unique)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &str) -> Grid {
        let cells: Vec<Cell> = rows.split('|').map(|c| Cell::parse_inner(c).unwrap()).collect();
        Grid::new(cells.try_into().unwrap()).unwrap()
    }

    #[test]
    fn dist3_example_grid() {
        let g = grid("5 9 3|8 9 2|1 9 7|8 4 7|1 4 3|5 4 2|1 2 2|5 2 7");
        let r = solve(&g, None).unwrap();
        assert!(r.unique);
        assert_eq!(r.answer().unwrap(), &Cell::from_digits(&[8, 2, 3]));
        // Every reading uses distribution-of-3 on the outer slots; one of
        // them reads the centre slot as a row-wise constant.
        let mut centre_constant = false;
        for (_, i) in &r.answers {
            let Interpretation::Transformation { slots } = i else { panic!() };
            assert_eq!(slots[0].kind, TransformKind::Dist3);
            assert_eq!(slots[2].kind, TransformKind::Dist3);
            centre_constant |= slots[1].kind == TransformKind::Constant && slots[1].orientation == Orientation::RowWise;
        }
        assert!(centre_constant);
    }

    #[test]
    fn all_identical_grid() {
        let g = grid("4|4|4|4|4|4|4|4");
        let r = solve(&g, None).unwrap();
        assert!(r.unique);
        assert!(!is_ambiguous(&g).unwrap());
        let orientations: Vec<_> = r
            .answers
            .iter()
            .filter_map(|(_, i)| match i {
                Interpretation::Transformation { slots } => Some(slots[0].orientation),
                _ => None,
            })
            .collect();
        assert!(orientations.contains(&Orientation::RowWise));
        assert!(orientations.contains(&Orientation::ColWise));
    }

    #[test]
    fn and_example() {
        let g = grid("2 9 7|1 9 7|~ 9 7|2 9 5|1 9 5|~ 9 5|2 9 ~|1 9 ~");
        let r = solve(&g, None).unwrap();
        assert!(r.unique);
        assert_eq!(r.answer().unwrap().digit_mask(), 1 << 9);
    }

    #[test]
    fn unexplained_grid() {
        let g = grid("1|5|2|8|3|3|0|9");
        assert_eq!(solve(&g, None), Err(SolveError::NoConsistentRule));
    }

    #[test]
    fn hint_restricts_family() {
        let g = grid("6 4|6 1|4 1|6 1|3 6|1 3|4 1|1 3");
        assert!(solve(&g, Some(FamilyHint::Transformation)).is_err());
        let r = solve(&g, Some(FamilyHint::Logic)).unwrap();
        assert!(r.unique);
    }
}
