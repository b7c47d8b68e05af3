//! Synthesis of the seven incorrect answer choices.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::rules::RuleSet;
use crate::cell::{AnswerKind, Cell, Grid};
use crate::render::answers_equivalent;

pub const DISTRACTOR_COUNT: usize = 7;
const MAX_DRAWS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistractorError {
    #[error("only {found} distinct distractors could be formed")]
    DistractorExhausted { found: usize },
}

/// Distractor methods for transformation problems. The last five apply to
/// multi-rule problems only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    ProblemCell,
    ProblemCellNudged,
    AnswerNudged,
    PreviousNudged,
    Random,
    AnswerPermuted,
    ProblemCellPermuted,
    PreviousPermuted,
    CombineCells,
    CombinePrevious,
}

const SINGLE_RULE: [Method; 5] =
    [Method::ProblemCell, Method::ProblemCellNudged, Method::AnswerNudged, Method::PreviousNudged, Method::Random];
const MULTI_RULE: [Method; 10] = [
    Method::ProblemCell,
    Method::ProblemCellNudged,
    Method::AnswerNudged,
    Method::PreviousNudged,
    Method::Random,
    Method::AnswerPermuted,
    Method::ProblemCellPermuted,
    Method::PreviousPermuted,
    Method::CombineCells,
    Method::CombinePrevious,
];

/// Add ±1 or ±2 to one digit, redrawing the step until the result stays in 0–9.
fn nudge(digits: &mut [u8], rng: &mut ChaCha8Rng) {
    let i = rng.gen_range(0..digits.len());
    loop {
        let step: i8 = *[-2, -1, 1, 2].choose(rng).unwrap();
        let v = digits[i] as i8 + step;
        if (0..=9).contains(&v) {
            digits[i] = v as u8;
            return;
        }
    }
}

fn draw(method: Method, cells: &[Vec<u8>], answer: &[u8], previous: &[Vec<u8>], rng: &mut ChaCha8Rng) -> Option<Vec<u8>> {
    let width = answer.len();
    let pick = |pool: &[Vec<u8>], rng: &mut ChaCha8Rng| pool.choose(rng).cloned();
    let out = match method {
        Method::ProblemCell => pick(cells, rng)?,
        Method::ProblemCellNudged => {
            let mut d = pick(cells, rng)?;
            nudge(&mut d, rng);
            d
        }
        Method::AnswerNudged => {
            let mut d = answer.to_vec();
            nudge(&mut d, rng);
            d
        }
        Method::PreviousNudged => {
            let mut d = pick(previous, rng)?;
            nudge(&mut d, rng);
            d
        }
        Method::Random => (0..width).map(|_| rng.gen_range(0..10)).collect(),
        Method::AnswerPermuted => {
            let mut d = answer.to_vec();
            d.shuffle(rng);
            d
        }
        Method::ProblemCellPermuted => {
            let mut d = pick(cells, rng)?;
            d.shuffle(rng);
            d
        }
        Method::PreviousPermuted => {
            let mut d = pick(previous, rng)?;
            d.shuffle(rng);
            d
        }
        Method::CombineCells => (0..width).map(|i| cells.choose(rng).map(|c| c[i])).collect::<Option<_>>()?,
        Method::CombinePrevious => {
            (0..width).map(|i| previous.choose(rng).map(|c| c[i])).collect::<Option<_>>()?
        }
    };
    Some(out)
}

fn transformation_distractors(grid: &Grid, answer: &Cell, rng: &mut ChaCha8Rng) -> Result<Vec<Cell>, DistractorError> {
    let cells: Vec<Vec<u8>> = grid.visible().iter().map(|c| c.digits().collect()).collect();
    let answer_digits: Vec<u8> = answer.digits().collect();
    let methods: &[Method] = if answer_digits.len() > 1 { &MULTI_RULE } else { &SINGLE_RULE };
    let mut previous: Vec<Vec<u8>> = Vec::new();
    for _ in 0..MAX_DRAWS {
        if previous.len() == DISTRACTOR_COUNT {
            break;
        }
        let method = *methods.choose(rng).unwrap();
        let Some(d) = draw(method, &cells, &answer_digits, &previous, rng) else { continue };
        if d == answer_digits || previous.contains(&d) {
            continue;
        }
        previous.push(d);
    }
    if previous.len() < DISTRACTOR_COUNT {
        return Err(DistractorError::DistractorExhausted { found: previous.len() });
    }
    Ok(previous.iter().map(|d| Cell::from_digits(d)).collect())
}

fn logic_distractors(
    grid: &Grid,
    answer: &Cell,
    rule: &super::rules::LogicRule,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Cell>, DistractorError> {
    let universe = grid.visible().iter().fold(0u16, |u, c| u | c.digit_mask());
    let answer_mask = answer.digit_mask();
    let mut subsets: Vec<u16> = (0..=universe).filter(|s| s & !universe == 0 && *s != answer_mask).collect();
    if subsets.len() < DISTRACTOR_COUNT {
        return Err(DistractorError::DistractorExhausted { found: subsets.len() });
    }
    subsets.shuffle(rng);
    let width = rule.layout.len();
    Ok(subsets[..DISTRACTOR_COUNT]
        .iter()
        .map(|&s| {
            let aligned = rule.render(s, usize::MAX);
            if rule.aligned {
                aligned
            } else {
                let mut p: Vec<usize> = (0..width).collect();
                p.shuffle(rng);
                Cell(p.iter().map(|&k| aligned.slots()[k]).collect())
            }
        })
        .collect())
}

/// Seven distinct incorrect choices for a problem with a derived answer.
pub fn generate_distractors(grid: &Grid, answer: &Cell, rules: &RuleSet, seed: u64) -> Result<Vec<Cell>, DistractorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (out, kind) = match rules {
        RuleSet::Transformation { .. } => (transformation_distractors(grid, answer, &mut rng)?, AnswerKind::OrderedDigits),
        RuleSet::Logic { rule } => (logic_distractors(grid, answer, rule, &mut rng)?, AnswerKind::DigitSet),
    };
    debug_assert!(out.iter().all(|d| !answers_equivalent(kind, d, answer)));
    Ok(out)
}
