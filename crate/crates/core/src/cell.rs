//! Digit-matrix cells, grids and problem identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Placeholder rendered for an empty slot in logic-problem cells.
pub const BLANK: char = '~';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CellError {
    #[error("invalid slot token {0:?}")]
    BadSlot(String),
    #[error("cell has no slots")]
    Empty,
    #[error("grid must have 3 rows of 3 cells with only the bottom-right missing")]
    BadShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Digit(u8),
    Blank,
}

impl Slot {
    pub fn digit(self) -> Option<u8> {
        match self {
            Slot::Digit(d) => Some(d),
            Slot::Blank => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Digit(d) => write!(f, "{d}"),
            Slot::Blank => write!(f, "{BLANK}"),
        }
    }
}

impl FromStr for Slot {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [b'~'] => Ok(Slot::Blank),
            [d @ b'0'..=b'9'] => Ok(Slot::Digit(d - b'0')),
            _ => Err(CellError::BadSlot(s.to_string())),
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered list of slots, rendered between brackets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cell(pub Vec<Slot>);

impl Cell {
    pub fn from_digits(digits: &[u8]) -> Self {
        debug_assert!(digits.iter().all(|&d| d <= 9));
        Cell(digits.iter().map(|&d| Slot::Digit(d)).collect())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Digits in slot order, blanks skipped.
    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().filter_map(|s| s.digit())
    }

    pub fn has_blank(&self) -> bool {
        self.0.contains(&Slot::Blank)
    }

    /// Bit `d` is set when digit `d` occurs in the cell.
    pub fn digit_mask(&self) -> u16 {
        self.digits().fold(0, |m, d| m | (1 << d))
    }

    /// True when no digit occurs twice.
    pub fn digits_distinct(&self) -> bool {
        let mut seen = 0u16;
        for d in self.digits() {
            if seen & (1 << d) != 0 {
                return false;
            }
            seen |= 1 << d;
        }
        true
    }

    /// Slot contents joined by single spaces, without brackets.
    pub fn inner_text(&self) -> String {
        let mut out = String::with_capacity(self.0.len() * 2);
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&s.to_string());
        }
        out
    }

    /// Parse "5 9 3" or "~ 7" (no brackets).
    pub fn parse_inner(text: &str) -> Result<Self, CellError> {
        let slots = text
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Slot>, _>>()?;
        if slots.is_empty() {
            return Err(CellError::Empty);
        }
        Ok(Cell(slots))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.inner_text())
    }
}

/// How a completion is compared against the expected cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    /// Transformation problems: digits must appear in the right order.
    OrderedDigits,
    /// Logic problems: digits compared as a multiset.
    DigitSet,
}

/// A 3×3 matrix whose bottom-right cell is missing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    visible: [Cell; 8],
}

impl Grid {
    pub const MISSING: (usize, usize) = (2, 2);

    /// Cells in row-major order, excluding the missing one.
    pub fn new(visible: [Cell; 8]) -> Result<Self, CellError> {
        if visible.iter().any(Cell::is_empty) {
            return Err(CellError::Empty);
        }
        Ok(Grid { visible })
    }

    /// Build from nine cells; the last one is dropped.
    pub fn from_full(cells: [Cell; 9]) -> Result<Self, CellError> {
        let [a, b, c, d, e, f, g, h, _] = cells;
        Grid::new([a, b, c, d, e, f, g, h])
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Cell> {
        assert!(row < 3 && col < 3, "grid index out of range");
        if (row, col) == Self::MISSING {
            None
        } else {
            Some(&self.visible[row * 3 + col])
        }
    }

    pub fn visible(&self) -> &[Cell; 8] {
        &self.visible
    }

    /// Width shared by every visible cell, if any.
    pub fn uniform_width(&self) -> Option<usize> {
        let w = self.visible[0].len();
        self.visible.iter().all(|c| c.len() == w).then_some(w)
    }

    pub fn rows(&self) -> [[Option<&Cell>; 3]; 3] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.get(r, c)))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct GridRepr(Vec<Vec<Option<Cell>>>);

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = (0..3)
            .map(|r| (0..3).map(|c| self.get(r, c).cloned()).collect())
            .collect();
        GridRepr(rows).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let GridRepr(rows) = GridRepr::deserialize(d)?;
        let bad = || serde::de::Error::custom(CellError::BadShape);
        if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
            return Err(bad());
        }
        let mut cells = Vec::with_capacity(8);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, cell) in row.into_iter().enumerate() {
                match (cell, (r, c) == Grid::MISSING) {
                    (Some(cell), false) => cells.push(cell),
                    (None, true) => {}
                    _ => return Err(bad()),
                }
            }
        }
        let visible: [Cell; 8] = cells.try_into().map_err(|_| bad())?;
        Grid::new(visible).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DigitMatrix,
    LetterString,
    Verbal,
    Story,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::DigitMatrix => "digit_matrix",
            Family::LetterString => "letter_string",
            Family::Verbal => "verbal",
            Family::Story => "story",
        })
    }
}

/// Identifies one generated problem. Regenerating from the same id is byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProblemId {
    pub family: Family,
    pub subtype: String,
    pub instance: u32,
    pub seed: u64,
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.family, self.subtype, self.instance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_parse() {
        assert_eq!("7".parse::<Slot>().unwrap(), Slot::Digit(7));
        assert_eq!("~".parse::<Slot>().unwrap(), Slot::Blank);
        assert!("10".parse::<Slot>().is_err());
        assert!("a".parse::<Slot>().is_err());
    }

    #[test]
    fn cell_display_and_mask() {
        let c = Cell::parse_inner("~ 7 4 ~").unwrap();
        assert_eq!(c.to_string(), "[~ 7 4 ~]");
        assert_eq!(c.digit_mask(), (1 << 7) | (1 << 4));
        assert!(c.has_blank());
        assert!(!Cell::from_digits(&[1, 2, 2]).digits_distinct());
    }

    #[test]
    fn grid_json_shape() {
        let cells: [Cell; 8] = std::array::from_fn(|i| Cell::from_digits(&[i as u8]));
        let g = Grid::new(cells).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"[[["0"],["1"],["2"]],[["3"],["4"],["5"]],[["6"],["7"],null]]"#
        );
        let back: Grid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid>(r#"[[["0"],["1"],["2"]]]"#).is_err());
    }
}
