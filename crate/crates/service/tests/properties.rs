//! Property tests for session designs over arbitrary seeds.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use anabench_core::digitmat::SubtypeCatalog;
use anabench_core::semantic::Distance;
use anabench_core::Problem;
use anabench_service::{build_trials, Experiment, Trial};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn designs_hold_for_any_seed(seed in any::<u64>()) {
        let m = common::materials();
        for e in Experiment::ALL {
            prop_assert_eq!(build_trials(e, &m, seed).unwrap(), build_trials(e, &m, seed).unwrap());
        }

        let subtypes: Vec<String> = build_trials(Experiment::DigitMat32, &m, seed)
            .unwrap()
            .iter()
            .map(|t| match t {
                Trial::DigitMatrix { problem } => m.problem(problem).and_then(Problem::as_digit_matrix).unwrap().subtype.clone(),
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        let expected: BTreeSet<String> = SubtypeCatalog::new().exp1().into_iter().map(|s| s.name).collect();
        prop_assert_eq!(subtypes.len(), 32);
        prop_assert_eq!(subtypes.into_iter().collect::<BTreeSet<_>>(), expected);

        let stories = build_trials(Experiment::Story18, &m, seed).unwrap();
        let mut groups = BTreeSet::new();
        let mut near = 0;
        for t in &stories {
            let Trial::Story { item, .. } = t else { panic!("unexpected {t:?}") };
            let s = &m.stories[*item];
            groups.insert(s.group_id.clone());
            near += usize::from(s.condition == Distance::Near);
        }
        prop_assert_eq!((stories.len(), groups.len(), near), (18, 18, 9));

        prop_assert_eq!(build_trials(Experiment::LetterString28, &m, seed).unwrap().len(), 28);
    }
}
