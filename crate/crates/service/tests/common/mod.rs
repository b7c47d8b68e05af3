//! Shared materials for service tests.

#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use anabench_core::digitmat::{build_dataset, DatasetSpec, SubtypeCatalog};
use anabench_core::letterstring::{build_letterstring_dataset, LetterDatasetSpec};
use anabench_core::semantic::{Distance, StoryItem};
use anabench_service::{AppState, Materials};

pub fn stories() -> Vec<StoryItem> {
    (0..18)
        .flat_map(|g| {
            [Distance::Near, Distance::Far].map(|condition| StoryItem {
                group_id: format!("g{g:02}"),
                source: format!("Source story {g}."),
                correct_target: format!("Correct {condition} target {g}."),
                incorrect_target: format!("Incorrect {condition} target {g}."),
                condition,
            })
        })
        .collect()
}

pub fn materials() -> Materials {
    static CELL: OnceLock<Materials> = OnceLock::new();
    CELL.get_or_init(|| {
        let catalog = SubtypeCatalog::new();
        let matrices = build_dataset(&DatasetSpec { subtypes: catalog.all().cloned().collect(), instances_per_subtype: 2, seed: 3 });
        let letters = build_letterstring_dataset(&LetterDatasetSpec { seed: 3, per_group: 2, eval_subset: false }).unwrap();
        let m = Materials::new([matrices, letters], stories());
        m.validate().unwrap();
        m
    })
    .clone()
}

pub fn state(dir: &std::path::Path) -> Arc<AppState> {
    AppState::open(materials(), dir, 7).unwrap()
}
