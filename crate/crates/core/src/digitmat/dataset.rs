//! Dataset construction: many instances per subtype with distinct grids.

use std::collections::{BTreeSet, HashSet};

use log::warn;
use serde_json::json;

use super::catalog::{OneRule, Subtype, SubtypeSpec};
use super::generate::{fill_slot, generate_problem, progression_bases, SlotTemplate};
use super::rules::{Orientation, TransformKind};
use super::DigitMatrixProblem;
use crate::cell::Grid;
use crate::problem_set::{mix_seed, Problem, ProblemSet};

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub subtypes: Vec<Subtype>,
    pub instances_per_subtype: usize,
    pub seed: u64,
}

/// Draws per requested instance before a subtype is declared exhausted.
const DRAWS_PER_INSTANCE: usize = 60;

/// All distinct grids of a one-rule progression subtype.
pub fn progression_grids(step: i8) -> BTreeSet<[[u8; 3]; 3]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = BTreeSet::new();
    for delta in [step, -step] {
        for base in progression_bases(delta) {
            for p in perms {
                for orientation in [Orientation::RowWise, Orientation::ColWise] {
                    let t = SlotTemplate { kind: TransformKind::Progression, orientation, delta, left: true };
                    out.insert(fill_slot(t, &[base, p[0], p[1], p[2]]));
                }
            }
        }
    }
    out
}

/// Number of distinct grids a subtype can produce, when small enough to matter.
pub fn instance_space(subtype: &Subtype) -> Option<usize> {
    match subtype.spec {
        SubtypeSpec::OneRule(OneRule::Progression1) => Some(progression_grids(1).len()),
        SubtypeSpec::OneRule(OneRule::Progression2) => Some(progression_grids(2).len()),
        _ => None,
    }
}

fn subtype_problems(subtype: &Subtype, n: usize, seed: u64) -> (Vec<DigitMatrixProblem>, Option<usize>) {
    let space = instance_space(subtype);
    let target = space.map_or(n, |s| s.min(n));
    let base = mix_seed(seed, &subtype.name);
    let mut seen: HashSet<Grid> = HashSet::new();
    let mut out = Vec::with_capacity(target);
    let mut draw = 0u64;
    while out.len() < target && (draw as usize) < n.max(1) * DRAWS_PER_INSTANCE {
        let s = base.wrapping_add(draw.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        draw += 1;
        match generate_problem(subtype, s) {
            Ok(mut p) if seen.insert(p.grid.clone()) => {
                p.id.instance = out.len() as u32;
                out.push(p);
            }
            Ok(_) => {}
            Err(e) => warn!("{e}"),
        }
    }
    (out, space)
}

/// Generate `instances_per_subtype` problems of every listed subtype.
///
/// Subtypes with fewer distinct grids than requested contribute all of
/// them; the shortfall is recorded in the set's metadata.
pub fn build_dataset(spec: &DatasetSpec) -> ProblemSet {
    let mut problems = Vec::new();
    let mut shortfall = serde_json::Map::new();
    for subtype in &spec.subtypes {
        let (ps, space) = subtype_problems(subtype, spec.instances_per_subtype, spec.seed);
        if ps.len() < spec.instances_per_subtype {
            shortfall.insert(
                subtype.name.clone(),
                json!({"requested": spec.instances_per_subtype, "generated": ps.len(), "instance_space": space}),
            );
        }
        problems.extend(ps.into_iter().map(Problem::DigitMatrix));
    }
    let mut set = ProblemSet::new(problems);
    set.metadata.insert("generator".into(), json!("digitmat"));
    set.metadata.insert("seed".into(), json!(spec.seed));
    set.metadata.insert("instances_per_subtype".into(), json!(spec.instances_per_subtype));
    set.metadata.insert("subtypes".into(), json!(spec.subtypes.iter().map(|s| &s.name).collect::<Vec<_>>()));
    set.metadata.insert("shortfall".into(), serde_json::Value::Object(shortfall));
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitmat::catalog::SubtypeCatalog;

    /// Grids whose lines are all ±step progressions along one orientation
    /// and whose line starts are a shuffle of three consecutive starts.
    fn brute_force_space(step: i32) -> usize {
        let mut grids = BTreeSet::new();
        for starts in 0..1000 {
            let s = [starts / 100, starts / 10 % 10, starts % 10];
            for d in [step, -step] {
                let mut sorted = s;
                sorted.sort_unstable();
                if sorted[1] - sorted[0] != step || sorted[2] - sorted[1] != step {
                    continue;
                }
                let v = |line: usize, pos: usize| s[line] + d * pos as i32;
                if (0..3).any(|l| !(0..=9).contains(&v(l, 2))) {
                    continue;
                }
                // Starts must continue the same progression as the lines.
                let first = if d > 0 { sorted[0] } else { sorted[2] };
                if (0..3).any(|l| (s[l] - first) * d.signum() < 0) {
                    continue;
                }
                let rows: [[i32; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| v(r, c)));
                let cols: [[i32; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| v(c, r)));
                grids.insert(rows);
                grids.insert(cols);
            }
        }
        grids.len()
    }

    #[test]
    fn progression_spaces() {
        assert_eq!(progression_grids(2).len(), brute_force_space(2));
        assert_eq!(progression_grids(1).len(), brute_force_space(1));
        // Fewer than the 100 instances requested per subtype at step 2.
        assert!(progression_grids(2).len() < 100);
        assert!(progression_grids(1).len() > 100);
    }

    #[test]
    fn small_dataset_counts() {
        let cat = SubtypeCatalog::new();
        let set = build_dataset(&DatasetSpec { subtypes: cat.resolve("1r-constant-row").unwrap(), instances_per_subtype: 1, seed: 3 });
        assert_eq!(set.problems.len(), 1);
        let set = build_dataset(&DatasetSpec {
            subtypes: cat.resolve("1r-progression-2,2r-CD").unwrap(),
            instances_per_subtype: 50,
            seed: 3,
        });
        let space = progression_grids(2).len();
        assert_eq!(set.problems.len(), space + 50);
        assert_eq!(set.metadata["shortfall"]["1r-progression-2"]["generated"], space);
    }

    #[test]
    fn constant_row_grids_distinct() {
        let cat = SubtypeCatalog::new();
        let set = build_dataset(&DatasetSpec { subtypes: cat.resolve("1r-constant-row").unwrap(), instances_per_subtype: 100, seed: 11 });
        let grids: HashSet<String> = set.problems.iter().map(|p| serde_json::to_string(p.as_digit_matrix().unwrap().grid.visible()).unwrap()).collect();
        assert_eq!(grids.len(), 100);
    }
}
