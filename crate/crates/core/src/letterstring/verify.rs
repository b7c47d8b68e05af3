//! Token-level re-derivation of letter-string answers.
//!
//! The verifier ignores the sampled parameters. It reads the
//! transformation off the source pair, decodes the target stem into
//! abstract elements under the listed generalizations, applies the
//! transformation, and re-encodes the result.

use super::transform::{apply_transformation, interval, letter_index};
use super::{Domain, GeneralizationKind, LetterStringProblem, TransformationKind, INTERLEAVE, REAL_WORLD};

/// How the target stem is laid out on the page.
#[derive(Debug, Clone, Copy)]
struct Representation {
    grouped: bool,
    interleaved: bool,
    reversed: bool,
    numbers: bool,
    domain: Domain,
}

impl Representation {
    fn of(p: &LetterStringProblem) -> Self {
        let has = |g| p.generalizations.contains(&g);
        Representation {
            grouped: has(GeneralizationKind::Grouping),
            interleaved: has(GeneralizationKind::InterleavedDistractors),
            reversed: has(GeneralizationKind::ReversedOrder),
            numbers: has(GeneralizationKind::LetterToNumber),
            domain: p.domain,
        }
    }

    fn block_len(&self) -> usize {
        1 + self.grouped as usize + self.interleaved as usize
    }

    fn value(&self, tok: &str) -> Option<i32> {
        match self.domain {
            Domain::RealWorld { sequence } => REAL_WORLD.get(sequence)?.iter().position(|w| *w == tok).map(|i| i as i32),
            Domain::Letters if self.numbers => tok.parse::<i32>().ok().filter(|n| (1..=26).contains(n)).map(|n| n - 1),
            Domain::Letters => letter_index(tok),
        }
    }

    fn token(&self, v: i32) -> Option<String> {
        match self.domain {
            Domain::RealWorld { sequence } => REAL_WORLD.get(sequence)?.get(v as usize).map(|w| w.to_string()),
            Domain::Letters if self.numbers => Some((v + 1).to_string()),
            Domain::Letters => (0..26).contains(&v).then(|| char::from(b'a' + v as u8).to_string()),
        }
    }

    fn limit(&self) -> i32 {
        match self.domain {
            Domain::RealWorld { .. } => 4,
            Domain::Letters => 26,
        }
    }

    fn decode(&self, tokens: &[String]) -> Option<Vec<i32>> {
        let n = self.block_len();
        if tokens.is_empty() || tokens.len() % n != 0 {
            return None;
        }
        let mut out = Vec::with_capacity(tokens.len() / n);
        for block in tokens.chunks(n) {
            let head = &block[0];
            if self.grouped && block[1] != *head {
                return None;
            }
            if self.interleaved && block[n - 1] != INTERLEAVE {
                return None;
            }
            out.push(self.value(head)?);
        }
        if self.reversed {
            out.reverse();
        }
        Some(out)
    }

    fn encode(&self, values: &[i32]) -> Option<Vec<String>> {
        let mut ordered = values.to_vec();
        if self.reversed {
            ordered.reverse();
        }
        let mut out = Vec::new();
        for v in ordered {
            let tok = self.token(v)?;
            out.push(tok.clone());
            if self.grouped {
                out.push(tok);
            }
            if self.interleaved {
                out.push(INTERLEAVE.to_string());
            }
        }
        Some(out)
    }
}

/// Transformations consistent with the source pair.
pub fn infer_transformations(left: &[String], right: &[String]) -> Vec<TransformationKind> {
    let decode = |s: &[String]| s.iter().map(|t| letter_index(t)).collect::<Option<Vec<i32>>>();
    let (Some(l), Some(r)) = (decode(left), decode(right)) else { return Vec::new() };
    TransformationKind::ALL
        .into_iter()
        .filter(|&k| apply_transformation(&l, k, 26).is_ok_and(|out| out == r))
        .collect()
}

/// Interval and underlying length implied by a transformed sequence.
fn shape(kind: TransformationKind, result: &[i32]) -> Option<(i32, usize)> {
    let n = result.len();
    match kind {
        TransformationKind::Extend => Some((interval(result)?, n - 1)),
        TransformationKind::Successor => Some((interval(&result[..n - 1])?, n)),
        TransformationKind::Predecessor => Some((interval(&result[1..])?, n)),
        _ => Some((interval(result)?, n)),
    }
}

/// Answer re-derived from the tokens alone, if every reading agrees.
pub fn rederive(p: &LetterStringProblem) -> Option<Vec<String>> {
    let kinds = infer_transformations(&p.source_left, &p.source_right);
    if kinds.is_empty() {
        return None;
    }
    // The source is always plain letters at interval 1.
    let src = shape(kinds[0], &p.source_right.iter().map(|t| letter_index(t)).collect::<Option<Vec<_>>>()?)?;
    if src.0 != 1 {
        return None;
    }
    let rep = Representation::of(p);
    let values = rep.decode(&p.target_stem)?;
    let mut answers = Vec::new();
    for kind in kinds {
        let result = apply_transformation(&values, kind, rep.limit()).ok()?;
        if let Domain::Letters = p.domain {
            let (k, len) = shape(kind, &result)?;
            let want_k = if p.generalizations.contains(&GeneralizationKind::LargerInterval) { 2 } else { 1 };
            let mult = if p.generalizations.contains(&GeneralizationKind::LongerTarget) { 2 } else { 1 };
            if k != want_k || len != src.1 * mult {
                return None;
            }
        }
        answers.push(rep.encode(&result)?);
    }
    answers.dedup();
    (answers.len() == 1).then(|| answers.pop().unwrap())
}

/// True when the stored answer matches the independent re-derivation.
pub fn verify_problem(p: &LetterStringProblem) -> bool {
    rederive(p).is_some_and(|a| a == p.answer)
}
