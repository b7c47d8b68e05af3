//! Prompt formats for letter-string problems and completion parsing.

use serde::{Deserialize, Serialize};

use super::LetterStringProblem;

pub const STANDARD_PREAMBLE: &str = "Let's try to complete the pattern:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PromptFormat {
    #[default]
    Standard,
    NoPrompt,
    Sentence,
}

impl PromptFormat {
    /// Character at which a completion is cut off.
    pub fn terminator(self) -> char {
        match self {
            PromptFormat::Sentence => '.',
            _ => ']',
        }
    }
}

impl std::str::FromStr for PromptFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(PromptFormat::Standard),
            "no_prompt" | "no-prompt" => Ok(PromptFormat::NoPrompt),
            "sentence" => Ok(PromptFormat::Sentence),
            _ => Err(format!("unknown prompt format {s:?}")),
        }
    }
}

pub fn render_letterstring_prompt(p: &LetterStringProblem, format: PromptFormat) -> String {
    let l = p.source_left.join(" ");
    let r = p.source_right.join(" ");
    let t = p.target_stem.join(" ");
    match format {
        PromptFormat::Standard => format!("{STANDARD_PREAMBLE}\n\n[{l}] [{r}]\n[{t}] ["),
        PromptFormat::NoPrompt => format!("[{l}] [{r}]\n[{t}] ["),
        PromptFormat::Sentence => format!("If {l} changes to {r}, then {t} should change to "),
    }
}

/// Tokens of a completion up to the format's terminator.
pub fn parse_letterstring_answer(text: &str, format: PromptFormat) -> Vec<String> {
    let head = text.split(format.terminator()).next().unwrap_or("");
    head.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{Family, ProblemId};
    use crate::letterstring::generate::{Detail, Instantiation};
    use crate::letterstring::{Domain, TransformationKind};

    fn worked() -> LetterStringProblem {
        let toks = |s: &str| s.split(' ').map(str::to_string).collect();
        let inst = Instantiation { start: 0, interval: 1, length: 4, detail: Detail::Plain };
        LetterStringProblem {
            id: ProblemId { family: Family::LetterString, subtype: "successor".into(), instance: 0, seed: 0 },
            source_left: toks("a b c d"),
            source_right: toks("a b c e"),
            target_stem: toks("i j k l"),
            answer: toks("i j k m"),
            transformation: TransformationKind::Successor,
            generalizations: vec![],
            domain: Domain::Letters,
            source: inst,
            target: Instantiation { start: 8, ..inst },
        }
    }

    #[test]
    fn formats() {
        let p = worked();
        assert_eq!(
            render_letterstring_prompt(&p, PromptFormat::Standard),
            "Let's try to complete the pattern:\n\n[a b c d] [a b c e]\n[i j k l] ["
        );
        assert_eq!(
            render_letterstring_prompt(&p, PromptFormat::Sentence),
            "If a b c d changes to a b c e, then i j k l should change to "
        );
        assert!(render_letterstring_prompt(&p, PromptFormat::NoPrompt).starts_with("[a b c d]"));
    }

    #[test]
    fn truncation() {
        assert_eq!(parse_letterstring_answer("i j k m] and more", PromptFormat::Standard), ["i", "j", "k", "m"]);
        assert_eq!(parse_letterstring_answer("i j k m. Because", PromptFormat::Sentence), ["i", "j", "k", "m"]);
    }
}
