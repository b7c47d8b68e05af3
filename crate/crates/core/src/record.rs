//! Evaluation records shared by model runs and human sessions.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::ProblemId;

/// Hex SHA-256 of a prompt.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Generative,
    MultipleChoice,
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvalMode::Generative => "generative",
            EvalMode::MultipleChoice => "multiple_choice",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFlag {
    /// The response could not be parsed into an answer.
    Unparseable,
    /// Several choices shared the top score.
    Tie,
    /// The model call failed.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub problem_id: ProblemId,
    /// `model:<id>` or `human:<session>`.
    pub agent: String,
    pub mode: EvalMode,
    pub raw_response: String,
    pub parsed_answer: Option<serde_json::Value>,
    pub selected_choice: Option<usize>,
    pub choice_scores: Option<Vec<f64>>,
    pub correct: bool,
    pub prompt_hash: String,
    pub timing_ms: u64,
    #[serde(default)]
    pub flags: Vec<RecordFlag>,
    #[serde(default)]
    pub error: Option<String>,
    /// Grouping keys such as `rule_count`, `condition` or `stratum`.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl EvalRecord {
    pub fn has_flag(&self, flag: RecordFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Write records as JSON Lines.
pub fn write_jsonl<W: Write>(mut w: W, records: &[EvalRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read JSON Lines records, skipping blank lines.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<EvalRecord>, serde_json::Error> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(serde_json::Error::io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            serde_json::Error::io(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))
        })?);
    }
    Ok(out)
}

/// Column order of the CSV record export.
pub const RECORD_CSV_HEADER: [&str; 12] = [
    "family",
    "subtype",
    "instance",
    "seed",
    "agent",
    "mode",
    "raw_response",
    "parsed_answer",
    "selected_choice",
    "correct",
    "prompt_hash",
    "timing_ms",
];

/// Write records as CSV with a fixed header. The header is written even
/// when there are no records.
pub fn write_csv<W: Write>(w: W, records: &[EvalRecord]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.problem_id.family.to_string(),
            r.problem_id.subtype.clone(),
            r.problem_id.instance.to_string(),
            r.problem_id.seed.to_string(),
            r.agent.clone(),
            r.mode.to_string(),
            r.raw_response.clone(),
            r.parsed_answer.as_ref().map(|v| v.to_string()).unwrap_or_default(),
            r.selected_choice.map(|c| c.to_string()).unwrap_or_default(),
            r.correct.to_string(),
            r.prompt_hash.clone(),
            r.timing_ms.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::Family;

    fn record() -> EvalRecord {
        EvalRecord {
            problem_id: ProblemId { family: Family::DigitMatrix, subtype: "1r-constant-row".into(), instance: 0, seed: 1 },
            agent: "model:mock".into(),
            mode: EvalMode::Generative,
            raw_response: "9]".into(),
            parsed_answer: Some(serde_json::json!(["9"])),
            selected_choice: None,
            choice_scores: None,
            correct: true,
            prompt_hash: "abc".into(),
            timing_ms: 0,
            flags: vec![],
            error: None,
            labels: BTreeMap::new(),
        }
    }

    #[test]
    fn jsonl_roundtrip() {
        let recs = vec![record(), EvalRecord { mode: EvalMode::MultipleChoice, ..record() }];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &recs).unwrap();
        assert_eq!(read_jsonl(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn csv_header_only_when_empty() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), RECORD_CSV_HEADER.join(","));
    }
}
