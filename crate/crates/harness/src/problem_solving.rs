//! Prompt templates for qualitative analogical problem solving. These are
//! exported for manual use and are never scored.

use std::path::{Path, PathBuf};

const RADIATION: &str = include_str!("../materials/radiation_target.txt");
const GENERAL: &str = include_str!("../materials/general_story.txt");
const LASER: &str = include_str!("../materials/lightbulb_laser.txt");
const ULTRASOUND: &str = include_str!("../materials/lightbulb_ultrasound.txt");
const WINE: &str = include_str!("../materials/wine_merchants.txt");
const TWINS: &str = include_str!("../materials/identical_twins.txt");
const GUMBALL: &str = include_str!("../materials/gumball_target.txt");
const STAFF: &str = include_str!("../materials/magic_staff.txt");
const CARPET: &str = include_str!("../materials/magic_carpet.txt");

pub const SOLUTION_CUE: &str = "Solution:";
pub const HINT_CUE: &str = "Solution (in solving this problem you may find that one of the stories you read before will give you a hint for a solution of this problem):";

/// Questions asked after the general-story solution.
pub const RADIATION_FOLLOW_UPS: [&str; 4] = [
    "Can you identify an analogy between the source story and the target problem?",
    "Who or what in the target problem is most analogous to the general in the source story?",
    "Who or what in the target problem is most analogous to the evil dictator in the source story?",
    "Who or what in the target problem is most analogous to the army in the source story?",
];

/// Questions asked after the magic-staff solution.
pub const GUMBALL_FOLLOW_UPS: [&str; 6] = [
    "Can you identify an analogy between the source story and the target problem?",
    "Does this analogy suggest a solution to the target problem?",
    "Who or what in the target problem is most analogous to the genie's old home in the source story?",
    "Who or what in the target problem is most analogous to the genie's new home in the source story?",
    "Who or what in the target problem is most analogous to the jewels in the source story?",
    "Who or what in the target problem is most analogous to the magic staff in the source story?",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSolvingPrompt {
    pub name: &'static str,
    pub prompt: String,
    pub follow_ups: Vec<&'static str>,
}

fn text(s: &str) -> &str {
    s.trim_end()
}

fn target_only(target: &str, cue: &str) -> String {
    format!("Target problem:\n\n{}\n\n{cue}", text(target))
}

fn with_source(source: &str, target: &str) -> String {
    format!("Source story:\n\n{}\n\n{}", text(source), target_only(target, SOLUTION_CUE))
}

fn with_distractors(cue: &str) -> String {
    format!(
        "Story #1 -- The Wine Merchants:\n\n{}\n\nStory #2 -- The General:\n\n{}\n\nStory #3 -- The Identical Twins:\n\n{}\n\n{}",
        text(WINE),
        text(GENERAL),
        text(TWINS),
        target_only(RADIATION, cue)
    )
}

/// Every template, in presentation order.
pub fn problem_solving_prompts() -> Vec<ProblemSolvingPrompt> {
    let p = |name, prompt, follow_ups: &[&'static str]| ProblemSolvingPrompt { name, prompt, follow_ups: follow_ups.to_vec() };
    vec![
        p("radiation_alone", target_only(RADIATION, SOLUTION_CUE), &[]),
        p("radiation_general_story", with_source(GENERAL, RADIATION), &RADIATION_FOLLOW_UPS),
        p("radiation_lightbulb_laser", with_source(LASER, RADIATION), &[]),
        p("radiation_lightbulb_ultrasound", with_source(ULTRASOUND, RADIATION), &[]),
        p("radiation_distractors", with_distractors(SOLUTION_CUE), &[]),
        p("radiation_distractors_hint", with_distractors(HINT_CUE), &[]),
        p("gumball_alone", target_only(GUMBALL, SOLUTION_CUE), &[]),
        p("gumball_magic_staff", with_source(STAFF, GUMBALL), &GUMBALL_FOLLOW_UPS),
        p("gumball_magic_carpet", with_source(CARPET, GUMBALL), &[]),
    ]
}

/// Write `<name>.txt` for each template, plus `<name>.followups.txt`
/// when follow-up questions exist. Returns the written paths.
pub fn export_problem_solving_prompts(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in problem_solving_prompts() {
        let path = dir.join(format!("{}.txt", t.name));
        std::fs::write(&path, &t.prompt)?;
        written.push(path);
        if !t.follow_ups.is_empty() {
            let path = dir.join(format!("{}.followups.txt", t.name));
            std::fs::write(&path, t.follow_ups.join("\n"))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(name: &str) -> String {
        problem_solving_prompts().into_iter().find(|t| t.name == name).unwrap().prompt
    }

    #[test]
    fn radiation_alone_layout() {
        let p = get("radiation_alone");
        assert!(p.starts_with("Target problem:\n\nSuppose you were a doctor faced with"));
        assert!(p.ends_with("\n\nSolution:"));
    }

    #[test]
    fn source_precedes_target() {
        let p = get("radiation_general_story");
        let src = p.find("An evil dictator controlled a fortress").unwrap();
        let tgt = p.find("Target problem:").unwrap();
        assert!(p.starts_with("Source story:") && src < tgt);
    }

    #[test]
    fn hint_variant_ends_with_hint() {
        let p = get("radiation_distractors_hint");
        assert!(p.ends_with("will give you a hint for a solution of this problem):"));
        let order: Vec<usize> = ["Story #1 -- The Wine Merchants:", "Story #2 -- The General:", "Story #3 -- The Identical Twins:"]
            .iter()
            .map(|h| p.find(h).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn export_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = export_problem_solving_prompts(dir.path()).unwrap();
        assert_eq!(files.len(), 11);
        assert!(dir.path().join("gumball_magic_staff.followups.txt").exists());
    }
}
