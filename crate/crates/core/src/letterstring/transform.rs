//! The six transformations on abstract sequences.
//!
//! Elements are positions in an ordered alphabet (0 = "a" for letters,
//! 0 = first word for a concept sequence). `limit` is the alphabet size.

use super::{LetterError, TransformationKind};

fn violated(kind: TransformationKind, reason: &str) -> LetterError {
    LetterError::PreconditionViolated { kind, reason: reason.to_string() }
}

/// Common step of an increasing arithmetic sequence.
pub fn interval(seq: &[i32]) -> Option<i32> {
    let k = *seq.get(1)? - seq[0];
    (k >= 1 && seq.windows(2).all(|w| w[1] - w[0] == k)).then_some(k)
}

/// Position `i` that breaks an otherwise arithmetic sequence, with the
/// value that belongs there.
fn outliers(seq: &[i32]) -> Vec<(usize, i32)> {
    let n = seq.len();
    let mut out = Vec::new();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let (j1, j2) = (others[0], others[1]);
        let span = seq[j2] - seq[j1];
        let gap = (j2 - j1) as i32;
        if span % gap != 0 || span / gap < 1 {
            continue;
        }
        let k = span / gap;
        let s = seq[j1] - j1 as i32 * k;
        if others.iter().all(|&j| seq[j] == s + j as i32 * k) && seq[i] != s + i as i32 * k {
            out.push((i, s + i as i32 * k));
        }
    }
    out
}

/// Apply one transformation, checking its structural precondition.
pub fn apply_transformation(seq: &[i32], kind: TransformationKind, limit: i32) -> Result<Vec<i32>, LetterError> {
    if seq.len() < 2 {
        return Err(violated(kind, "sequence shorter than two elements"));
    }
    if seq.iter().any(|&v| v < 0 || v >= limit) {
        return Err(LetterError::InfeasibleAlphabetRange);
    }
    let in_range = |v: i32| if (0..limit).contains(&v) { Ok(v) } else { Err(LetterError::InfeasibleAlphabetRange) };
    let out = match kind {
        TransformationKind::Extend | TransformationKind::Successor | TransformationKind::Predecessor => {
            let k = interval(seq).ok_or_else(|| violated(kind, "not an increasing arithmetic sequence"))?;
            let mut out = seq.to_vec();
            match kind {
                TransformationKind::Extend => out.push(in_range(seq[seq.len() - 1] + k)?),
                TransformationKind::Successor => *out.last_mut().unwrap() = in_range(seq[seq.len() - 1] + k)?,
                _ => out[0] = in_range(seq[0] - k)?,
            }
            out
        }
        TransformationKind::RemoveRedundant => {
            let dups: Vec<usize> = (1..seq.len()).filter(|&i| seq[i] == seq[i - 1]).collect();
            if dups.len() != 1 {
                return Err(violated(kind, "expected exactly one repeated element"));
            }
            let mut out = seq.to_vec();
            out.remove(dups[0]);
            interval(&out).ok_or_else(|| violated(kind, "remainder is not alphabetic"))?;
            out
        }
        TransformationKind::FixAlphabetic => {
            if interval(seq).is_some() {
                return Err(violated(kind, "no out-of-place element"));
            }
            let found = outliers(seq);
            let mut fixed: Vec<Vec<i32>> = found
                .iter()
                .map(|&(i, v)| {
                    let mut out = seq.to_vec();
                    out[i] = v;
                    out
                })
                .collect();
            fixed.dedup();
            match fixed.len() {
                1 => {
                    let out = fixed.pop().unwrap();
                    for &v in &out {
                        in_range(v)?;
                    }
                    out
                }
                0 => return Err(violated(kind, "no single out-of-place element")),
                _ => return Err(LetterError::DerivationConflict),
            }
        }
        TransformationKind::Sort => {
            let mut sorted = seq.to_vec();
            sorted.sort_unstable();
            interval(&sorted).ok_or_else(|| violated(kind, "sorted sequence is not alphabetic"))?;
            let moved = seq.iter().zip(&sorted).filter(|(a, b)| a != b).count();
            if moved != 2 {
                return Err(violated(kind, "expected exactly two swapped elements"));
            }
            sorted
        }
    };
    Ok(out)
}

pub fn letter_index(token: &str) -> Option<i32> {
    match token.as_bytes() {
        [b @ b'a'..=b'z'] => Some((b - b'a') as i32),
        _ => None,
    }
}

pub fn letter(index: i32) -> String {
    debug_assert!((0..26).contains(&index));
    char::from(b'a' + index as u8).to_string()
}

/// Apply a transformation to a sequence of single-letter tokens.
pub fn apply_to_letters(tokens: &[&str], kind: TransformationKind) -> Result<Vec<String>, LetterError> {
    let seq = tokens
        .iter()
        .map(|t| letter_index(t).ok_or_else(|| violated(kind, &format!("{t:?} is not a letter"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(apply_transformation(&seq, kind, 26)?.into_iter().map(letter).collect())
}
