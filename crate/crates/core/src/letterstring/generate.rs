//! Sampling of letter-string problems and constructive answer derivation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transform::letter;
use super::verify::verify_problem;
use super::{
    Domain, GeneralizationKind, LetterError, LetterStringProblem, LetterSubtype, TransformationKind, INTERLEAVE,
    REAL_WORLD,
};
use crate::cell::{Family, ProblemId};

const MAX_ATTEMPTS: usize = 200;
const X_INDEX: i32 = 23;

/// Structural detail that distinguishes the stem from a plain sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Detail {
    Plain,
    /// The element at `index` appears twice.
    Redundant { index: usize },
    /// The element at `index` is replaced by `value`.
    OutOfPlace { index: usize, value: i32 },
    /// Elements at `first` and `second` trade places.
    Swap { first: usize, second: usize },
}

/// One side of a problem as an abstract sequence: `start`, `start +
/// interval`, ... (`length` elements) with a structural detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instantiation {
    pub start: i32,
    pub interval: i32,
    pub length: usize,
    pub detail: Detail,
}

impl Instantiation {
    pub fn base(&self) -> Vec<i32> {
        (0..self.length as i32).map(|j| self.start + j * self.interval).collect()
    }

    pub fn stem(&self) -> Vec<i32> {
        let mut seq = self.base();
        match self.detail {
            Detail::Plain => {}
            Detail::Redundant { index } => seq.insert(index + 1, seq[index]),
            Detail::OutOfPlace { index, value } => seq[index] = value,
            Detail::Swap { first, second } => seq.swap(first, second),
        }
        seq
    }

    /// The transformed sequence, built from the parameters.
    pub fn answer(&self, kind: TransformationKind) -> Vec<i32> {
        let mut seq = self.base();
        let next = self.start + self.length as i32 * self.interval;
        match kind {
            TransformationKind::Extend => seq.push(next),
            TransformationKind::Successor => *seq.last_mut().unwrap() = next,
            TransformationKind::Predecessor => seq[0] = self.start - self.interval,
            _ => {}
        }
        seq
    }
}

/// Token for one element under the domain and number generalization.
pub(crate) fn element_token(v: i32, domain: Domain, number: bool) -> String {
    match domain {
        Domain::RealWorld { sequence } => REAL_WORLD[sequence][v as usize].to_string(),
        Domain::Letters if number => (v + 1).to_string(),
        Domain::Letters => letter(v),
    }
}

/// Render an abstract sequence under the representational generalizations
/// (grouping, interleave, reversal, letter-to-number).
pub fn encode(seq: &[i32], generalizations: &[GeneralizationKind], domain: Domain) -> Vec<String> {
    let has = |g| generalizations.contains(&g);
    let mut blocks: Vec<Vec<String>> = seq
        .iter()
        .map(|&v| {
            let tok = element_token(v, domain, has(GeneralizationKind::LetterToNumber));
            let mut block = vec![tok.clone()];
            if has(GeneralizationKind::Grouping) {
                block.push(tok);
            }
            if has(GeneralizationKind::InterleavedDistractors) {
                block.push(INTERLEAVE.to_string());
            }
            block
        })
        .collect();
    if has(GeneralizationKind::ReversedOrder) {
        blocks.reverse();
    }
    blocks.concat()
}

fn limit(domain: Domain) -> i32 {
    match domain {
        Domain::Letters => 26,
        Domain::RealWorld { .. } => 4,
    }
}

fn check_range(inst: &Instantiation, kind: TransformationKind, domain: Domain) -> Result<(), LetterError> {
    let lim = limit(domain);
    let all = inst.stem().into_iter().chain(inst.answer(kind));
    for v in all {
        if !(0..lim).contains(&v) {
            return Err(LetterError::InfeasibleAlphabetRange);
        }
    }
    Ok(())
}

/// Target stem for an instantiation. Interval and length generalizations
/// are part of the instantiation; the remaining ones change its rendering.
pub fn generate_target(
    inst: &Instantiation,
    kind: TransformationKind,
    generalizations: &[GeneralizationKind],
    domain: Domain,
) -> Result<Vec<String>, LetterError> {
    check_range(inst, kind, domain)?;
    Ok(encode(&inst.stem(), generalizations, domain))
}

/// The problem's answer, derived from its target parameters.
pub fn derive_answer(p: &LetterStringProblem) -> Result<Vec<String>, LetterError> {
    check_range(&p.target, p.transformation, p.domain)?;
    Ok(encode(&p.target.answer(p.transformation), &p.generalizations, p.domain))
}

fn sample_detail(kind: TransformationKind, length: usize, base: &[i32], lim: i32, rng: &mut ChaCha8Rng) -> Detail {
    match kind {
        TransformationKind::RemoveRedundant => Detail::Redundant { index: rng.gen_range(0..length) },
        TransformationKind::FixAlphabetic => {
            let choices: Vec<i32> = (0..lim).filter(|v| !base.contains(v)).collect();
            Detail::OutOfPlace { index: rng.gen_range(0..length), value: *choices.choose(rng).unwrap() }
        }
        TransformationKind::Sort => {
            let first = rng.gen_range(0..length - 1);
            let second = rng.gen_range(first + 1..length);
            Detail::Swap { first, second }
        }
        _ => Detail::Plain,
    }
}

/// Sample an instantiation with the given shape whose stem and answer fit the alphabet.
fn sample_letters(kind: TransformationKind, interval: i32, length: usize, rng: &mut ChaCha8Rng) -> Instantiation {
    let low = if kind == TransformationKind::Predecessor { interval } else { 0 };
    let extra = matches!(kind, TransformationKind::Extend | TransformationKind::Successor) as i32;
    let high = 25 - (length as i32 - 1 + extra) * interval;
    let start = rng.gen_range(low..=high);
    let shape = Instantiation { start, interval, length, detail: Detail::Plain };
    let detail = sample_detail(kind, length, &shape.base(), 26, rng);
    Instantiation { detail, ..shape }
}

fn sample_real_world(kind: TransformationKind, rng: &mut ChaCha8Rng) -> Instantiation {
    let (start, length) = match kind {
        TransformationKind::Predecessor => (1, 3),
        TransformationKind::Sort => (0, 4),
        _ => (0, 3),
    };
    let shape = Instantiation { start, interval: 1, length, detail: Detail::Plain };
    let detail = sample_detail(kind, length, &shape.base(), 4, rng);
    Instantiation { detail, ..shape }
}

/// Generate one problem of a subtype, deterministically from `seed`.
pub fn generate_letterstring_problem(subtype: &LetterSubtype, seed: u64) -> Result<LetterStringProblem, LetterError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = subtype.transformation;
    let gens = &subtype.generalizations;
    if subtype.real_world && !TransformationKind::REAL_WORLD.contains(&kind) {
        return Err(LetterError::UnknownSubtype(subtype.to_string()));
    }
    let has = |g| gens.contains(&g);
    for _ in 0..MAX_ATTEMPTS {
        let source = sample_letters(kind, 1, kind.base_length(), &mut rng);
        let (domain, target) = if subtype.real_world {
            let domain = Domain::RealWorld { sequence: rng.gen_range(0..REAL_WORLD.len()) };
            (domain, sample_real_world(kind, &mut rng))
        } else {
            let interval = if has(GeneralizationKind::LargerInterval) { 2 } else { 1 };
            let mult = if has(GeneralizationKind::LongerTarget) { 2 } else { 1 };
            (Domain::Letters, sample_letters(kind, interval, kind.base_length() * mult, &mut rng))
        };
        let interleaved_letters = domain == Domain::Letters
            && has(GeneralizationKind::InterleavedDistractors)
            && !has(GeneralizationKind::LetterToNumber);
        if interleaved_letters && target.stem().into_iter().chain(target.answer(kind)).any(|v| v == X_INDEX) {
            continue;
        }
        let Ok(target_stem) = generate_target(&target, kind, gens, domain) else { continue };
        let source_left = encode(&source.stem(), &[], Domain::Letters);
        if gens.is_empty() && domain == Domain::Letters && target_stem == source_left {
            continue;
        }
        let mut p = LetterStringProblem {
            id: ProblemId { family: Family::LetterString, subtype: subtype.to_string(), instance: 0, seed },
            source_right: encode(&source.answer(kind), &[], Domain::Letters),
            source_left,
            target_stem,
            answer: Vec::new(),
            transformation: kind,
            generalizations: gens.clone(),
            domain,
            source,
            target,
        };
        let Ok(answer) = derive_answer(&p) else { continue };
        p.answer = answer;
        if verify_problem(&p) {
            return Ok(p);
        }
    }
    Err(LetterError::GenerationExhausted(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use GeneralizationKind::*;

    fn plain(start: i32, interval: i32, length: usize) -> Instantiation {
        Instantiation { start, interval, length, detail: Detail::Plain }
    }

    fn target(inst: Instantiation, gens: &[GeneralizationKind]) -> String {
        generate_target(&inst, TransformationKind::Extend, gens, Domain::Letters).unwrap().join(" ")
    }

    #[test]
    fn worked_generalizations() {
        let ijkl = plain(8, 1, 4);
        assert_eq!(target(ijkl, &[]), "i j k l");
        assert_eq!(target(plain(6, 1, 4), &[LetterToNumber]), "7 8 9 10");
        assert_eq!(target(ijkl, &[Grouping]), "i i j j k k l l");
        assert_eq!(target(plain(8, 1, 8), &[LongerTarget]), "i j k l m n o p");
        assert_eq!(target(ijkl, &[ReversedOrder]), "l k j i");
        assert_eq!(target(ijkl, &[InterleavedDistractors]), "i x j x k x l x");
        assert_eq!(target(plain(8, 2, 4), &[LargerInterval]), "i k m o");
    }

    #[test]
    fn constructive_answers() {
        let ijkl = plain(8, 1, 4);
        let enc = |v: Vec<i32>| encode(&v, &[], Domain::Letters).join(" ");
        assert_eq!(enc(ijkl.answer(TransformationKind::Successor)), "i j k m");
        assert_eq!(enc(plain(8, 2, 4).answer(TransformationKind::Successor)), "i k m q");
        let cold = Domain::RealWorld { sequence: 0 };
        let rw = plain(0, 1, 3);
        assert_eq!(encode(&rw.stem(), &[], cold).join(" "), "cold cool warm");
        assert_eq!(encode(&rw.answer(TransformationKind::Successor), &[], cold).join(" "), "cold cool hot");
    }

    #[test]
    fn reversed_predecessor_changes_final_token() {
        let inst = plain(8, 1, 4);
        let gens = [ReversedOrder];
        let stem = generate_target(&inst, TransformationKind::Predecessor, &gens, Domain::Letters).unwrap();
        let ans = encode(&inst.answer(TransformationKind::Predecessor), &gens, Domain::Letters);
        assert_eq!(stem.join(" "), "l k j i");
        assert_eq!(ans.join(" "), "l k j h");
    }

    #[test]
    fn off_alphabet_rejected() {
        let inst = plain(22, 1, 4);
        assert_eq!(
            generate_target(&inst, TransformationKind::Extend, &[], Domain::Letters),
            Err(LetterError::InfeasibleAlphabetRange)
        );
    }

    #[test]
    fn every_subtype_generates() {
        for kind in TransformationKind::ALL {
            for g in GeneralizationKind::ALL {
                let st = LetterSubtype::new(kind, vec![g], false);
                for seed in 0..5 {
                    let p = generate_letterstring_problem(&st, seed).unwrap();
                    assert!(verify_problem(&p));
                }
            }
        }
    }
}
