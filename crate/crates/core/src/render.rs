//! Text rendering of digit matrices and parsing of model completions.

use thiserror::Error;

use crate::cell::{AnswerKind, Cell, CellError, Grid, Slot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unparseable answer {0:?}")]
    Unparseable(String),
    #[error("malformed matrix prompt: {0}")]
    MalformedPrompt(String),
}

/// Prompt form: rows on separate lines, the missing cell opened with a lone "[".
pub fn render_matrix_prompt(grid: &Grid) -> String {
    let mut out = String::new();
    for r in 0..3 {
        if r > 0 {
            out.push('\n');
        }
        for c in 0..3 {
            if c > 0 {
                out.push(' ');
            }
            match grid.get(r, c) {
                Some(cell) => out.push_str(&cell.to_string()),
                None => out.push('['),
            }
        }
    }
    out
}

/// Human-facing 3×3 layout with the missing cell shown as "[ ? ]".
pub fn render_matrix_display(grid: &Grid) -> [[String; 3]; 3] {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| match grid.get(r, c) {
            Some(cell) => cell.to_string(),
            None => "[ ? ]".to_string(),
        })
    })
}

/// Parse a completion that follows the open bracket of the missing cell.
///
/// Everything from the first "]" on is dropped. Blank placeholders are
/// accepted and discarded; any other non-digit token makes the answer
/// unparseable.
pub fn parse_generated_answer(text: &str, kind: AnswerKind) -> Result<Cell, ParseError> {
    let _ = kind;
    let head = text.split(']').next().unwrap_or("");
    let mut digits = Vec::new();
    for tok in head.split_whitespace() {
        match tok.parse::<Slot>() {
            Ok(Slot::Digit(d)) => digits.push(d),
            Ok(Slot::Blank) => {}
            Err(_) => return Err(ParseError::Unparseable(text.to_string())),
        }
    }
    if digits.is_empty() {
        return Err(ParseError::Unparseable(text.to_string()));
    }
    Ok(Cell::from_digits(&digits))
}

pub fn answers_equivalent(kind: AnswerKind, expected: &Cell, given: &Cell) -> bool {
    match kind {
        AnswerKind::OrderedDigits => expected.digits().eq(given.digits()),
        AnswerKind::DigitSet => {
            let mut a: Vec<u8> = expected.digits().collect();
            let mut b: Vec<u8> = given.digits().collect();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        }
    }
}

/// A matrix recovered from the tail of a prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedMatrixPrompt {
    pub grid: Grid,
    /// Contents of the ninth cell when the prompt already closes it.
    pub completion: Option<Cell>,
    /// Byte offset where the matrix starts inside the prompt.
    pub start: usize,
}

/// Recover the last matrix in a prompt (the final three lines).
///
/// Accepts both the open form ending in "[" and the closed form produced
/// when a choice is appended followed by "]".
pub fn parse_matrix_prompt(prompt: &str) -> Result<ParsedMatrixPrompt, ParseError> {
    let bad = |m: &str| ParseError::MalformedPrompt(m.to_string());
    let lines: Vec<&str> = prompt.split('\n').collect();
    if lines.len() < 3 {
        return Err(bad("fewer than three lines"));
    }
    let tail = &lines[lines.len() - 3..];
    let start = prompt.len() - tail.iter().map(|l| l.len()).sum::<usize>() - 2;
    let mut cells: Vec<Cell> = Vec::with_capacity(9);
    let mut completion = None;
    for (r, line) in tail.iter().enumerate() {
        let mut rest = line.trim_end_matches(' ');
        for c in 0..3 {
            rest = rest.trim_start();
            let body = rest.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
            let last = r == 2 && c == 2;
            match body.find(']') {
                Some(end) => {
                    let cell = Cell::parse_inner(&body[..end]).map_err(|e: CellError| bad(&e.to_string()))?;
                    if last {
                        completion = Some(cell);
                    } else {
                        cells.push(cell);
                    }
                    rest = &body[end + 1..];
                }
                None if last && body.trim().is_empty() => rest = "",
                None => return Err(bad("unterminated cell")),
            }
        }
        if !rest.trim().is_empty() {
            return Err(bad("trailing text after third cell"));
        }
    }
    let visible: [Cell; 8] = cells.try_into().map_err(|_| bad("wrong cell count"))?;
    let grid = Grid::new(visible).map_err(|e| bad(&e.to_string()))?;
    Ok(ParsedMatrixPrompt { grid, completion, start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::Cell;

    fn grid(rows: &str) -> Grid {
        let cells: Vec<Cell> = rows
            .split('|')
            .map(|c| Cell::parse_inner(c).unwrap())
            .collect();
        Grid::new(cells.try_into().unwrap()).unwrap()
    }

    #[test]
    fn constant_grid_prompt() {
        let g = grid("0|0|0|0|0|0|0|0");
        assert_eq!(render_matrix_prompt(&g), "[0] [0] [0]\n[0] [0] [0]\n[0] [0] [");
    }

    #[test]
    fn aligned_or_first_row() {
        let g = grid("~ 7|~ 7 4 ~|4 ~|9 7|9 7 4 8|4 8|9 ~|9 ~ ~ 8");
        let p = render_matrix_prompt(&g);
        assert_eq!(p.lines().next().unwrap(), "[~ 7] [~ 7 4 ~] [4 ~]");
    }

    #[test]
    fn display_marks_missing() {
        let g = grid("5|1|9|5|1|9|5|1");
        let d = render_matrix_display(&g);
        assert_eq!(d[2][2], "[ ? ]");
        assert_eq!(d[0][0], "[5]");
        assert_eq!(d.iter().flatten().count(), 9);
    }

    #[test]
    fn parse_completions() {
        let k = AnswerKind::OrderedDigits;
        assert_eq!(parse_generated_answer("8 2 3] [...", k).unwrap(), Cell::from_digits(&[8, 2, 3]));
        assert_eq!(parse_generated_answer("9]", k).unwrap(), Cell::from_digits(&[9]));
        assert!(parse_generated_answer("abc]", k).is_err());
        assert!(parse_generated_answer("]", k).is_err());
        assert!(parse_generated_answer("~ ~]", k).is_err());
        assert_eq!(parse_generated_answer("~ 9 ~]", AnswerKind::DigitSet).unwrap(), Cell::from_digits(&[9]));
    }

    #[test]
    fn equivalence_rules() {
        let c = Cell::from_digits;
        assert!(answers_equivalent(AnswerKind::DigitSet, &c(&[4, 3]), &c(&[3, 4])));
        assert!(!answers_equivalent(AnswerKind::OrderedDigits, &c(&[4, 9]), &c(&[9, 4])));
        assert!(answers_equivalent(AnswerKind::OrderedDigits, &c(&[9]), &c(&[9])));
        let blanked = Cell::parse_inner("~ 9 ~").unwrap();
        assert!(answers_equivalent(AnswerKind::DigitSet, &blanked, &c(&[9])));
        assert!(!answers_equivalent(AnswerKind::DigitSet, &c(&[3, 3]), &c(&[3])));
    }

    #[test]
    fn prompt_parse_roundtrip() {
        let g = grid("5 9 3|8 9 2|1 9 7|8 4 7|1 4 3|5 4 2|1 2 2|5 2 7");
        let p = render_matrix_prompt(&g);
        let parsed = parse_matrix_prompt(&p).unwrap();
        assert_eq!(parsed.grid, g);
        assert_eq!(parsed.completion, None);
        let closed = format!("context\n\n{p}8 2 3]");
        let parsed = parse_matrix_prompt(&closed).unwrap();
        assert_eq!(parsed.grid, g);
        assert_eq!(parsed.completion, Some(Cell::from_digits(&[8, 2, 3])));
        assert_eq!(&closed[parsed.start..parsed.start + 7], "[5 9 3]");
    }
}
