//! Story analogies: the forced-choice comparison design and verdict parsing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetWarning, Distance, SemanticError};

/// Number of source stories in the published design.
pub const SOURCE_STORIES: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryItem {
    pub group_id: String,
    pub source: String,
    pub correct_target: String,
    pub incorrect_target: String,
    pub condition: Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryOrder {
    CorrectFirst,
    IncorrectFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryChoice {
    StoryA,
    StoryB,
    Both,
    Unparseable,
}

impl StoryItem {
    /// Targets shown as Story A and Story B.
    pub fn targets(&self, order: StoryOrder) -> (&str, &str) {
        match order {
            StoryOrder::CorrectFirst => (&self.correct_target, &self.incorrect_target),
            StoryOrder::IncorrectFirst => (&self.incorrect_target, &self.correct_target),
        }
    }

    /// The label under which the correct target appears.
    pub fn correct_choice(order: StoryOrder) -> StoryChoice {
        match order {
            StoryOrder::CorrectFirst => StoryChoice::StoryA,
            StoryOrder::IncorrectFirst => StoryChoice::StoryB,
        }
    }
}

pub fn render_story_prompt(item: &StoryItem, order: StoryOrder) -> String {
    let (a, b) = item.targets(order);
    format!(
        "Consider the following story:\n\nStory 1: {}\n\nNow consider two more stories:\n\nStory A: {}\n\nStory B: {}\n\n\
         Which of Story A and Story B is a better analogy to Story 1?\n\
         Is the best answer Story A, Story B, or both are equally analogous?",
        item.source, a, b
    )
}

/// One rendered comparison of the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryComparison {
    pub item: usize,
    pub order: StoryOrder,
}

/// Every item in both target orders.
pub fn story_comparisons(items: &[StoryItem]) -> Vec<StoryComparison> {
    (0..items.len())
        .flat_map(|item| [StoryOrder::CorrectFirst, StoryOrder::IncorrectFirst].map(|order| StoryComparison { item, order }))
        .collect()
}

fn verdict(sentence: &str) -> Option<StoryChoice> {
    let s = sentence.trim().trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if let Some(i) = s.find("both") {
        if s[i..].contains("equally") {
            return Some(StoryChoice::Both);
        }
    }
    let label = |l: char| if l == 'a' { StoryChoice::StoryA } else { StoryChoice::StoryB };
    let mut hits = Vec::new();
    for l in ['a', 'b'] {
        let named = [
            format!("answer is story {l}"),
            format!("answer: story {l}"),
            format!("answer would be story {l}"),
            format!("story {l} is the better"),
            format!("story {l} is a better"),
            format!("story {l} is the best"),
            format!("story {l} is better"),
            format!("story {l} is more analogous"),
            format!("story {l} is the more analogous"),
        ];
        let bare = s == format!("story {l}") || s == l.to_string();
        if bare || named.iter().any(|p| s.contains(p.as_str())) {
            hits.push(label(l));
        }
    }
    match hits.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

/// The forced choice expressed in a free-text response.
///
/// Sentences are scanned in order and the first one stating a verdict
/// decides. Explanations that follow are ignored.
pub fn parse_story_choice(response: &str) -> StoryChoice {
    response
        .split(['.', '!', '?', '\n'])
        .find_map(verdict)
        .unwrap_or(StoryChoice::Unparseable)
}

/// Structural checks and count warnings for a story set.
pub fn validate_story_items(items: &[StoryItem]) -> Result<Vec<DatasetWarning>, SemanticError> {
    let mut groups: BTreeMap<&str, Vec<Distance>> = BTreeMap::new();
    for (i, it) in items.iter().enumerate() {
        let row = i + 1;
        for (field, text) in [
            ("group_id", &it.group_id),
            ("source", &it.source),
            ("correct_target", &it.correct_target),
            ("incorrect_target", &it.incorrect_target),
        ] {
            if text.trim().is_empty() {
                return Err(SemanticError::schema(row, field, "must not be empty"));
            }
        }
        groups.entry(&it.group_id).or_default().push(it.condition);
    }
    for (i, (g, conds)) in groups.iter().enumerate() {
        let mut sorted = conds.clone();
        sorted.sort();
        if sorted != [Distance::Near, Distance::Far] {
            return Err(SemanticError::schema(i + 1, "condition", format!("group {g} needs one near and one far item")));
        }
    }
    let mut warnings = Vec::new();
    if groups.len() != SOURCE_STORIES {
        warnings.push(DatasetWarning::CountMismatch { group: "story sources".into(), expected: SOURCE_STORIES, found: groups.len() });
    }
    Ok(warnings)
}

/// Load story items from a JSON array file.
pub fn load_story_items(path: &Path) -> Result<(Vec<StoryItem>, Vec<DatasetWarning>), SemanticError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SemanticError::Io { path: path.display().to_string(), source })?;
    if text.trim().is_empty() {
        return Err(SemanticError::schema(0, "<file>", "empty file"));
    }
    let items: Vec<StoryItem> =
        serde_json::from_str(&text).map_err(|e| SemanticError::schema(0, "<file>", e.to_string()))?;
    if items.is_empty() {
        return Err(SemanticError::schema(0, "<file>", "no items"));
    }
    let warnings = validate_story_items(&items)?;
    Ok((items, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KARLA: &str = "Karla, an old hawk, lived at the top of a tall oak tree. One afternoon, she saw a hunter on the ground with a bow and some crude arrows that had no feathers. The hunter took aim and shot at the hawk but missed. Karla knew the hunter wanted her feathers so she glided down to the hunter and offered to give him a few. The hunter was so grateful that he pledged never to shoot at a hawk again. He went off and shot deer instead.";
    const NEAR_CORRECT: &str = "Once there was an eagle named Zerdia who nested on a rocky cliff. One day she saw a sportsman coming with a crossbow and some bolts that had no feathers. The sportsman attacked but the bolts missed. Zerdia realized that the sportsman wanted her tailfeathers so she flew down and donated a few of her tailfeathers to the sportsman. The sportsman was pleased. He promised never to attack eagles again.";
    const NEAR_INCORRECT: &str = "Once there was an eagle named Zerdia who donated a few of her tailfeathers to a sportsman so he would promise never to attack eagles. One day Zerdia was nesting high on a rocky cliff when she saw the sportsman coming with a crossbow. Zerdia flew down to meet the man, but he attacked and felled her with a single bolt. As she fluttered to the ground Zerdia realized that the bolt had her own tailfeathers on it.";

    fn karla_near() -> StoryItem {
        StoryItem {
            group_id: "karla".into(),
            source: KARLA.into(),
            correct_target: NEAR_CORRECT.into(),
            incorrect_target: NEAR_INCORRECT.into(),
            condition: Distance::Near,
        }
    }

    #[test]
    fn template_layout() {
        let item = karla_near();
        let p = render_story_prompt(&item, StoryOrder::CorrectFirst);
        let expected = format!(
            "Consider the following story:\n\nStory 1: {KARLA}\n\nNow consider two more stories:\n\nStory A: {NEAR_CORRECT}\n\nStory B: {NEAR_INCORRECT}\n\nWhich of Story A and Story B is a better analogy to Story 1?\nIs the best answer Story A, Story B, or both are equally analogous?"
        );
        assert_eq!(p, expected);
        for marker in ["Story 1:", "Story A:", "Story B:"] {
            assert_eq!(p.matches(marker).count(), 1);
        }
        let swapped = render_story_prompt(&item, StoryOrder::IncorrectFirst);
        assert_eq!(swapped, expected.replace(NEAR_CORRECT, "@").replace(NEAR_INCORRECT, NEAR_CORRECT).replace('@', NEAR_INCORRECT));
    }

    #[test]
    fn worked_verdicts() {
        let near = "Story A is the better analogy to Story 1. Story B is not as analogous because it has a different ending. In Story 1, the hunter is grateful for the hawk's feathers and promises not to shoot at hawks again. In Story B, the hunter attacks the eagle and kills her with her own feathers.";
        assert_eq!(parse_story_choice(near), StoryChoice::StoryA);
        let far = "The best answer is Story A. Story A is a better analogy to Story 1 because it follows a similar pattern.";
        assert_eq!(parse_story_choice(far), StoryChoice::StoryA);
        assert_eq!(parse_story_choice("I think both are equally analogous."), StoryChoice::Both);
    }

    #[test]
    fn verdict_edge_cases() {
        assert_eq!(parse_story_choice("Story B"), StoryChoice::StoryB);
        assert_eq!(parse_story_choice("\n\nSTORY B IS THE BETTER ANALOGY."), StoryChoice::StoryB);
        assert_eq!(parse_story_choice("In Story 1, a hawk. Story B is a better analogy."), StoryChoice::StoryB);
        assert_eq!(parse_story_choice("Story B is not as analogous."), StoryChoice::Unparseable);
        assert_eq!(parse_story_choice(""), StoryChoice::Unparseable);
        assert_eq!(parse_story_choice("It is hard to say."), StoryChoice::Unparseable);
    }

    #[test]
    fn comparisons_cover_both_orders() {
        let items = vec![karla_near(); 36];
        let cmp = story_comparisons(&items);
        assert_eq!(cmp.len(), 72);
        for i in 0..36 {
            assert_eq!(cmp.iter().filter(|c| c.item == i).count(), 2);
        }
    }

    #[test]
    fn group_validation() {
        let near = karla_near();
        let far = StoryItem { condition: Distance::Far, ..near.clone() };
        let w = validate_story_items(&[near.clone(), far]).unwrap();
        assert_eq!(w.len(), 1);
        assert!(validate_story_items(&[near.clone(), near]).is_err());
    }
}
