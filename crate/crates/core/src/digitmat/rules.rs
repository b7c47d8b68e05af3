//! Rule vocabulary for digit matrices and direct answer derivation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::{Cell, Grid, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Constant,
    Dist3,
    Progression,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] = [TransformKind::Constant, TransformKind::Dist3, TransformKind::Progression];

    pub fn letter(self) -> char {
        match self {
            TransformKind::Constant => 'C',
            TransformKind::Dist3 => 'D',
            TransformKind::Progression => 'P',
        }
    }
}

/// Which lines a rule runs along. A row-wise rule relates the cells of
/// each row; a column-wise rule those of each column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    RowWise,
    ColWise,
    /// Logic rules only: the rule holds along rows and along columns.
    Both,
}

impl Orientation {
    /// Map (line, position) to (row, col).
    pub fn cell(self, line: usize, pos: usize) -> (usize, usize) {
        match self {
            Orientation::ColWise => (pos, line),
            _ => (line, pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformRule {
    pub kind: TransformKind,
    pub orientation: Orientation,
    /// Step along each line; non-zero only for progressions.
    pub delta: i8,
    /// Slot index inside each cell governed by this rule.
    pub slot: usize,
    /// Constant: digit of each line. Dist3: the three digits in first-line
    /// order. Progression: first value of each line.
    pub values: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicOp {
    Or,
    And,
    Xor,
}

impl LogicOp {
    pub const ALL: [LogicOp; 3] = [LogicOp::Or, LogicOp::And, LogicOp::Xor];

    pub fn apply(self, a: u16, b: u16) -> u16 {
        match self {
            LogicOp::Or => a | b,
            LogicOp::And => a & b,
            LogicOp::Xor => a ^ b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicRule {
    pub op: LogicOp,
    /// Index of the line (row and/or column) holding the derived set.
    pub target: usize,
    pub orientation: Orientation,
    pub aligned: bool,
    /// Digit held by each aligned slot; cell width is its length.
    pub layout: Vec<u8>,
    /// Slot order used for each of the nine cells (row-major): rendered
    /// slot `k` shows aligned slot `permutation[i][k]`. Identity when aligned.
    pub permutation: Vec<Vec<usize>>,
}

impl LogicRule {
    /// Render a digit set in cell `index` (row-major) of this rule's layout.
    pub fn render(&self, mask: u16, index: usize) -> Cell {
        let aligned: Vec<Slot> = self
            .layout
            .iter()
            .map(|&d| if mask & (1 << d) != 0 { Slot::Digit(d) } else { Slot::Blank })
            .collect();
        match self.permutation.get(index) {
            Some(p) if p.len() == aligned.len() => Cell(p.iter().map(|&k| aligned[k]).collect()),
            _ => Cell(aligned),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "category", rename_all = "snake_case")]
pub enum RuleSet {
    Transformation { rules: Vec<TransformRule> },
    Logic { rule: LogicRule },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeriveError {
    #[error("visible cells violate {0}")]
    InconsistentRules(String),
    #[error("rules do not determine a single completion")]
    Underdetermined,
}

/// Digit at one slot of every cell; `None` for the missing cell.
pub(crate) fn slot_values(grid: &Grid, slot: usize) -> Option<[[Option<u8>; 3]; 3]> {
    let mut out = [[None; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            if let Some(cell) = grid.get(r, c) {
                *v = Some(cell.slots().get(slot)?.digit()?);
            }
        }
    }
    Some(out)
}

/// Per-cell digit masks; the missing cell is 0.
pub(crate) fn masks(grid: &Grid) -> [[u16; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| grid.get(r, c).map_or(0, Cell::digit_mask)))
}

fn derive_slot(values: &[[Option<u8>; 3]; 3], rule: &TransformRule) -> Result<u8, DeriveError> {
    let line = |l: usize| -> [Option<u8>; 3] {
        std::array::from_fn(|p| {
            let (r, c) = rule.orientation.cell(l, p);
            values[r][c]
        })
    };
    let fail = || DeriveError::InconsistentRules(format!("{:?} rule on slot {}", rule.kind, rule.slot));
    let complete = |l: usize| -> [u8; 3] { line(l).map(|v| v.expect("complete line")) };
    let last = line(2);
    let (a, b) = (last[0].ok_or_else(fail)?, last[1].ok_or_else(fail)?);
    match rule.kind {
        TransformKind::Constant => {
            for l in 0..2 {
                let v = complete(l);
                if v[0] != v[1] || v[1] != v[2] {
                    return Err(fail());
                }
            }
            if a != b {
                return Err(fail());
            }
            Ok(a)
        }
        TransformKind::Dist3 => {
            let set = |v: &[u8]| v.iter().fold(0u16, |m, d| m | (1 << d));
            let first = complete(0);
            let full = set(&first);
            if full.count_ones() != 3 || set(&complete(1)) != full {
                return Err(fail());
            }
            let seen = set(&[a, b]);
            if a == b || seen & !full != 0 {
                return Err(fail());
            }
            Ok((full & !seen).trailing_zeros() as u8)
        }
        TransformKind::Progression => {
            let d = rule.delta as i16;
            if d == 0 {
                return Err(fail());
            }
            for l in 0..2 {
                let v = complete(l).map(i16::from);
                if v[1] - v[0] != d || v[2] - v[1] != d {
                    return Err(fail());
                }
            }
            if b as i16 - a as i16 != d {
                return Err(fail());
            }
            let next = b as i16 + d;
            if !(0..=9).contains(&next) {
                return Err(fail());
            }
            Ok(next as u8)
        }
    }
}

/// Derived set for the missing cell under a logic rule, computed directly
/// from the rule's definition.
fn derive_logic(m: &[[u16; 3]; 3], rule: &LogicRule) -> Result<u16, DeriveError> {
    let t = rule.target;
    let ops: Vec<usize> = (0..3).filter(|&i| i != t).collect();
    let (p, q) = (ops[0], ops[1]);
    let fail = || DeriveError::InconsistentRules(format!("{:?} rule", rule.op));
    let orientations: &[Orientation] = match rule.orientation {
        Orientation::Both => &[Orientation::RowWise, Orientation::ColWise],
        Orientation::RowWise => &[Orientation::RowWise],
        Orientation::ColWise => &[Orientation::ColWise],
    };
    let at = |o: Orientation, l: usize, pos: usize| {
        let (r, c) = o.cell(l, pos);
        m[r][c]
    };
    for &o in orientations {
        for l in 0..2 {
            if rule.op.apply(at(o, l, p), at(o, l, q)) != at(o, l, t) {
                return Err(fail());
            }
        }
    }
    if t == 2 {
        let o = orientations[0];
        let ans = rule.op.apply(at(o, 2, p), at(o, 2, q));
        // A column-wise check of the same cell must agree.
        for &o in orientations {
            if rule.op.apply(at(o, 2, p), at(o, 2, q)) != ans {
                return Err(fail());
            }
        }
        return Ok(ans);
    }
    // The missing cell is an operand: intersect the completions allowed by
    // each governed line through it.
    let other = if p == 2 { q } else { p };
    let mut lo = 0u16;
    let mut hi = 0x3ff_u16;
    for &o in orientations {
        let known = at(o, 2, other);
        let derived = at(o, 2, t);
        match rule.op {
            LogicOp::Xor => {
                let s = known ^ derived;
                lo |= s;
                hi &= s;
            }
            LogicOp::Or => {
                if known & !derived != 0 {
                    return Err(fail());
                }
                lo |= derived & !known;
                hi &= derived;
            }
            LogicOp::And => {
                if derived & !known != 0 {
                    return Err(fail());
                }
                lo |= derived;
                hi &= !(known & !derived);
            }
        }
    }
    if lo & !hi != 0 {
        return Err(fail());
    }
    if lo != hi {
        return Err(DeriveError::Underdetermined);
    }
    Ok(lo)
}

/// Digit-to-slot layout shared by every cell of an aligned logic grid.
///
/// Returns the cell width and, for each digit, its slot. Two digits may
/// share a slot only if they never co-occur.
pub fn aligned_layout(grid: &Grid) -> Option<(usize, [Option<usize>; 10])> {
    let width = grid.uniform_width()?;
    let mut slot_of: [Option<usize>; 10] = [None; 10];
    for cell in grid.visible() {
        for (i, s) in cell.slots().iter().enumerate() {
            if let Slot::Digit(d) = *s {
                match slot_of[d as usize] {
                    None => slot_of[d as usize] = Some(i),
                    Some(j) if j == i => {}
                    Some(_) => return None,
                }
            }
        }
    }
    Some((width, slot_of))
}

/// Render a digit set, placing digits in their layout slots when the grid
/// is aligned and the placement is collision-free; otherwise ascending.
pub fn render_set(grid: &Grid, mask: u16) -> Cell {
    let digits: Vec<u8> = (0..10u8).filter(|d| mask & (1 << d) != 0).collect();
    if let Some((width, slot_of)) = aligned_layout(grid) {
        let mut slots = vec![Slot::Blank; width];
        let mut ok = true;
        for &d in &digits {
            match slot_of[d as usize] {
                Some(i) if slots[i] == Slot::Blank => slots[i] = Slot::Digit(d),
                _ => ok = false,
            }
        }
        if ok {
            return Cell(slots);
        }
    }
    Cell::from_digits(&digits)
}

/// Fill the missing cell from the rules, failing if any visible cell
/// breaks a rule.
pub fn derive_answer(grid: &Grid, rules: &RuleSet) -> Result<Cell, DeriveError> {
    match rules {
        RuleSet::Transformation { rules } => {
            let width = rules.iter().map(|r| r.slot + 1).max().unwrap_or(0);
            let mut out = vec![0u8; width];
            let mut covered = vec![false; width];
            for rule in rules {
                let values = slot_values(grid, rule.slot)
                    .ok_or_else(|| DeriveError::InconsistentRules(format!("slot {} missing", rule.slot)))?;
                out[rule.slot] = derive_slot(&values, rule)?;
                covered[rule.slot] = true;
            }
            if covered.iter().any(|c| !c) {
                return Err(DeriveError::Underdetermined);
            }
            Ok(Cell::from_digits(&out))
        }
        RuleSet::Logic { rule } => {
            let m = masks(grid);
            let set = derive_logic(&m, rule)?;
            let layout_covers = rule.layout.iter().fold(0u16, |a, d| a | (1 << d));
            if !rule.layout.is_empty() && set & !layout_covers == 0 {
                return Ok(rule.render(set, 8));
            }
            Ok(render_set(grid, set))
        }
    }
}
