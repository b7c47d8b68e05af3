//! Session designs, persistence and counterbalancing without HTTP.

mod common;

use std::collections::BTreeSet;

use anabench_core::digitmat::SubtypeCatalog;
use anabench_core::semantic::StoryOrder;
use anabench_core::stats::binomial_ci;
use anabench_core::Problem;
use anabench_service::{build_trials, Experiment, HumanResponse, Trial};

fn matrix_subtypes(trials: &[Trial]) -> Vec<String> {
    let m = common::materials();
    trials
        .iter()
        .map(|t| match t {
            Trial::DigitMatrix { problem } => m.problem(problem).and_then(Problem::as_digit_matrix).unwrap().subtype.clone(),
            other => panic!("unexpected {other:?}"),
        })
        .collect()
}

#[test]
fn digitmat32_covers_each_subtype_once_in_random_order() {
    let m = common::materials();
    let expected: Vec<String> = SubtypeCatalog::new().exp1().into_iter().map(|s| s.name).collect();
    let a = matrix_subtypes(&build_trials(Experiment::DigitMat32, &m, 1).unwrap());
    let b = matrix_subtypes(&build_trials(Experiment::DigitMat32, &m, 2).unwrap());
    assert_eq!(a.iter().collect::<BTreeSet<_>>(), expected.iter().collect::<BTreeSet<_>>());
    assert_eq!(a.len(), 32);
    assert_ne!(a, b);
    assert_ne!(a, expected);
}

#[test]
fn digitmat42_keeps_easy_to_hard_order() {
    let m = common::materials();
    let expected: Vec<String> = SubtypeCatalog::new().exp2().into_iter().map(|s| s.name).collect();
    for seed in 0..3 {
        assert_eq!(matrix_subtypes(&build_trials(Experiment::DigitMat42Ordered, &m, seed).unwrap()), expected);
    }
}

#[test]
fn story18_has_nine_per_condition() {
    let m = common::materials();
    let trials = build_trials(Experiment::Story18, &m, 9).unwrap();
    let mut groups = BTreeSet::new();
    let mut near = 0;
    for t in &trials {
        let Trial::Story { item, .. } = t else { panic!() };
        let s = &m.stories[*item];
        groups.insert(s.group_id.clone());
        near += usize::from(s.condition == anabench_core::semantic::Distance::Near);
    }
    assert_eq!((trials.len(), groups.len(), near), (18, 18, 9));
}

#[test]
fn story_order_is_counterbalanced_across_sessions() {
    let m = common::materials();
    let mut first = 0u64;
    let mut total = 0u64;
    for seed in 0..300 {
        for t in build_trials(Experiment::Story18, &m, seed).unwrap() {
            let Trial::Story { order, .. } = t else { panic!() };
            first += u64::from(order == StoryOrder::CorrectFirst);
            total += 1;
        }
    }
    let (lo, hi) = binomial_ci(first, total, 0.95).unwrap();
    assert!(lo <= 0.5 && 0.5 <= hi, "{first}/{total}: [{lo}, {hi}]");
}

#[test]
fn designs_are_reproducible_from_the_seed() {
    let m = common::materials();
    for e in Experiment::ALL {
        assert_eq!(build_trials(e, &m, 42).unwrap(), build_trials(e, &m, 42).unwrap());
    }
}

#[test]
fn missing_material_is_reported() {
    let m = anabench_service::Materials::new([], vec![]);
    assert!(build_trials(Experiment::DigitMat32, &m, 0).is_err());
    assert!(build_trials(Experiment::LetterString28, &m, 0).is_err());
    assert!(build_trials(Experiment::Story18, &m, 0).is_err());
}

fn drive(state: &anabench_service::AppState, id: &str, steps: usize) {
    for _ in 0..steps {
        let s = &state.sessions()[id];
        let t = s.cursor;
        let r = match &s.trials[t] {
            Trial::DigitMatrix { problem } => {
                let p = state.materials().problem(problem).unwrap().as_digit_matrix().unwrap().clone();
                if s.stage() == anabench_service::Stage::FreeResponse {
                    HumanResponse { trial_id: t, free_response: Some("1 2".into()), choice_index: None, story_choice: None, latency_ms: 10 }
                } else {
                    HumanResponse { trial_id: t, free_response: None, choice_index: Some(p.correct_choice), story_choice: None, latency_ms: 20 }
                }
            }
            _ => unreachable!(),
        };
        state.submit(id, r).unwrap();
    }
}

#[test]
fn replay_reconstructs_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let before = {
        let state = common::state(dir.path());
        let a = state.create_session(Experiment::DigitMat32, 1).unwrap().id;
        let b = state.create_session(Experiment::DigitMat42Ordered, 2).unwrap().id;
        // Snapshots fall every 7 events, so recovery mixes snapshot and log tail.
        drive(&state, &a, 11);
        drive(&state, &b, 5);
        state.sessions()
    };
    assert!(dir.path().join("snapshot.json").exists());
    let after = common::state(dir.path()).sessions();
    assert_eq!(before, after);

    // Without the snapshot the full log gives the same state.
    std::fs::remove_file(dir.path().join("snapshot.json")).unwrap();
    assert_eq!(common::state(dir.path()).sessions(), before);
}

#[test]
fn truncated_final_event_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let state = common::state(dir.path());
        let id = state.create_session(Experiment::DigitMat32, 1).unwrap().id;
        drive(&state, &id, 3);
        (id, state.sessions())
    };
    let log = dir.path().join("events.jsonl");
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str("{\"event\":\"response_acc");
    std::fs::write(&log, text).unwrap();
    let state = common::state(dir.path());
    assert_eq!(state.sessions(), before);
    // The store stays appendable after the torn write is cut away.
    drive(&state, &id, 1);
    drop(state);
    assert_eq!(common::state(dir.path()).sessions()[&id].responses.len(), 4);
}
