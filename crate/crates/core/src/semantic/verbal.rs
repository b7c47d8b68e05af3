//! Four-term verbal analogies in colon notation.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{DatasetWarning, Distance, SemanticError};
use crate::model::{argmax_lowest, mean_logprob, CompletionRequest, ModelClient, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbalDataset {
    UclaVat,
    SternbergNigro,
    SatTurney,
    JonesEtAl,
}

impl VerbalDataset {
    pub const ALL: [VerbalDataset; 4] =
        [VerbalDataset::UclaVat, VerbalDataset::SternbergNigro, VerbalDataset::SatTurney, VerbalDataset::JonesEtAl];

    pub fn name(self) -> &'static str {
        match self {
            VerbalDataset::UclaVat => "ucla_vat",
            VerbalDataset::SternbergNigro => "sternberg_nigro",
            VerbalDataset::SatTurney => "sat_turney",
            VerbalDataset::JonesEtAl => "jones_et_al",
        }
    }

    pub fn expected_items(self) -> usize {
        match self {
            VerbalDataset::UclaVat => 80,
            VerbalDataset::SternbergNigro => 200,
            VerbalDataset::SatTurney => 374,
            VerbalDataset::JonesEtAl => 120,
        }
    }

    /// Expected items per relation type, where the design is balanced.
    pub fn expected_per_relation(self) -> Option<(usize, usize)> {
        match self {
            VerbalDataset::UclaVat => Some((4, 20)),
            VerbalDataset::SternbergNigro => Some((5, 40)),
            VerbalDataset::JonesEtAl => Some((3, 40)),
            VerbalDataset::SatTurney => None,
        }
    }

    pub fn choice_count(self) -> usize {
        match self {
            VerbalDataset::SatTurney => 5,
            _ => 2,
        }
    }

    pub fn is_sat(self) -> bool {
        self == VerbalDataset::SatTurney
    }
}

impl std::fmt::Display for VerbalDataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for VerbalDataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        VerbalDataset::ALL
            .into_iter()
            .find(|d| d.name() == norm)
            .ok_or_else(|| format!("unknown verbal dataset {s:?}"))
    }
}

/// One answer option: a final term, or a (C, D) pair for SAT items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerbalChoice {
    Term(String),
    Pair(String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbalItem {
    pub dataset: VerbalDataset,
    pub a: String,
    pub b: String,
    /// Absent for SAT items, whose choices carry their own C term.
    pub c: Option<String>,
    pub choices: Vec<VerbalChoice>,
    pub correct_index: usize,
    pub relation: String,
    pub distance: Option<Distance>,
}

/// A validated dataset with any count warnings.
#[derive(Debug, Clone)]
pub struct VerbalLoad {
    pub items: Vec<VerbalItem>,
    pub warnings: Vec<DatasetWarning>,
}

/// On-disk row of the JSON schema.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    a: String,
    b: String,
    #[serde(default)]
    c: Option<String>,
    choices: Vec<VerbalChoice>,
    correct: usize,
    #[serde(default)]
    relation: Option<String>,
    #[serde(default)]
    distance: Option<Distance>,
}

fn require(row: usize, field: &str, value: &str) -> Result<String, SemanticError> {
    let v = value.trim();
    if v.is_empty() {
        return Err(SemanticError::schema(row, field, "must not be empty"));
    }
    Ok(v.to_string())
}

fn build_item(row: usize, dataset: VerbalDataset, r: JsonRow) -> Result<VerbalItem, SemanticError> {
    let a = require(row, "a", &r.a)?;
    let b = require(row, "b", &r.b)?;
    let c = match (&r.c, dataset.is_sat()) {
        (Some(_), true) => return Err(SemanticError::schema(row, "c", "SAT items carry C terms in their choices")),
        (None, true) => None,
        (Some(c), false) => Some(require(row, "c", c)?),
        (None, false) => return Err(SemanticError::schema(row, "c", "missing")),
    };
    if r.choices.len() != dataset.choice_count() {
        return Err(SemanticError::schema(
            row,
            "choices",
            format!("expected {} choices, found {}", dataset.choice_count(), r.choices.len()),
        ));
    }
    let mut choices = Vec::with_capacity(r.choices.len());
    for (i, ch) in r.choices.into_iter().enumerate() {
        let field = format!("choices[{i}]");
        choices.push(match (ch, dataset.is_sat()) {
            (VerbalChoice::Term(d), false) => VerbalChoice::Term(require(row, &field, &d)?),
            (VerbalChoice::Pair(c, d), true) => VerbalChoice::Pair(require(row, &field, &c)?, require(row, &field, &d)?),
            (_, true) => return Err(SemanticError::schema(row, &field, "expected a [C, D] pair")),
            (_, false) => return Err(SemanticError::schema(row, &field, "expected a single term")),
        });
    }
    if r.correct >= choices.len() {
        return Err(SemanticError::schema(row, "correct", format!("index {} out of range", r.correct)));
    }
    let relation = match r.relation {
        Some(rel) if !rel.trim().is_empty() => rel.trim().to_string(),
        _ if dataset.expected_per_relation().is_some() => return Err(SemanticError::schema(row, "relation", "missing")),
        _ => String::new(),
    };
    if dataset == VerbalDataset::JonesEtAl && r.distance.is_none() {
        return Err(SemanticError::schema(row, "distance", "missing"));
    }
    Ok(VerbalItem { dataset, a, b, c, choices, correct_index: r.correct, relation, distance: r.distance })
}

fn parse_json(text: &str, dataset: VerbalDataset) -> Result<Vec<VerbalItem>, SemanticError> {
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| SemanticError::schema(0, "<file>", e.to_string()))?;
    rows.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let row = i + 1;
            let r: JsonRow = serde_json::from_value(v).map_err(|e| SemanticError::schema(row, "<row>", e.to_string()))?;
            build_item(row, dataset, r)
        })
        .collect()
}

fn parse_csv(text: &str, dataset: VerbalDataset) -> Result<Vec<VerbalItem>, SemanticError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| SemanticError::schema(0, "<header>", e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let n = dataset.choice_count();
    for name in ["a", "b", "correct"] {
        if col(name).is_none() {
            return Err(SemanticError::schema(0, name, "missing column"));
        }
    }
    let mut items = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| SemanticError::schema(row, "<row>", e.to_string()))?;
        let get = |name: &str| col(name).and_then(|c| rec.get(c)).map(str::to_string);
        let opt = |name: &str| get(name).filter(|s| !s.is_empty());
        let mut choices = Vec::with_capacity(n);
        for k in 1..=n {
            let d = opt(&format!("d{k}")).ok_or_else(|| SemanticError::schema(row, &format!("d{k}"), "missing"))?;
            choices.push(match dataset.is_sat() {
                true => {
                    let c = opt(&format!("c{k}")).ok_or_else(|| SemanticError::schema(row, &format!("c{k}"), "missing"))?;
                    VerbalChoice::Pair(c, d)
                }
                false => VerbalChoice::Term(d),
            });
        }
        let correct = get("correct")
            .unwrap_or_default()
            .parse::<usize>()
            .map_err(|e| SemanticError::schema(row, "correct", e.to_string()))?;
        let distance = opt("distance")
            .map(|s| s.parse::<Distance>())
            .transpose()
            .map_err(|e| SemanticError::schema(row, "distance", e))?;
        let r = JsonRow {
            a: get("a").unwrap_or_default(),
            b: get("b").unwrap_or_default(),
            c: opt("c"),
            choices,
            correct,
            relation: opt("relation"),
            distance,
        };
        items.push(build_item(row, dataset, r)?);
    }
    Ok(items)
}

fn count_warnings(dataset: VerbalDataset, items: &[VerbalItem]) -> Vec<DatasetWarning> {
    let mut out = Vec::new();
    let mut check = |group: String, expected: usize, found: usize| {
        if expected != found {
            out.push(DatasetWarning::CountMismatch { group, expected, found });
        }
    };
    check(dataset.name().to_string(), dataset.expected_items(), items.len());
    if let Some((types, per)) = dataset.expected_per_relation() {
        let mut by_rel: BTreeMap<&str, usize> = BTreeMap::new();
        for it in items {
            *by_rel.entry(it.relation.as_str()).or_default() += 1;
        }
        check(format!("{} relation types", dataset.name()), types, by_rel.len());
        for (rel, found) in by_rel {
            check(format!("{}/{rel}", dataset.name()), per, found);
        }
    }
    if dataset == VerbalDataset::JonesEtAl {
        let half = dataset.expected_items() / 2;
        for d in [Distance::Near, Distance::Far] {
            let found = items.iter().filter(|it| it.distance == Some(d)).count();
            check(format!("{}/{d}", dataset.name()), half, found);
        }
    }
    out
}

/// Load and validate a verbal dataset from a JSON or CSV file.
///
/// The format follows the extension; anything other than `.csv` is read
/// as JSON. Count deviations from the published design are warnings.
pub fn load_verbal_dataset(path: &Path, dataset: VerbalDataset) -> Result<VerbalLoad, SemanticError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SemanticError::Io { path: path.display().to_string(), source })?;
    if text.trim().is_empty() {
        return Err(SemanticError::schema(0, "<file>", "empty file"));
    }
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let items = if is_csv { parse_csv(&text, dataset)? } else { parse_json(&text, dataset)? };
    if items.is_empty() {
        return Err(SemanticError::schema(0, "<file>", "no items"));
    }
    let warnings = count_warnings(dataset, &items);
    for w in &warnings {
        warn!("{w}");
    }
    Ok(VerbalLoad { items, warnings })
}

/// Candidate prompt and the byte spans of the scored terms within it.
pub fn render_verbal_candidate(context: &str, item: &VerbalItem, choice: usize) -> (String, Vec<Range<usize>>) {
    let mut out = String::from(context);
    if !context.is_empty() {
        out.push('\n');
    }
    out.push_str(&item.a);
    out.push(':');
    out.push_str(&item.b);
    out.push_str("::");
    let mut spans = Vec::new();
    let mut term = |out: &mut String, t: &str| {
        spans.push(out.len()..out.len() + t.len());
        out.push_str(t);
    };
    match &item.choices[choice] {
        VerbalChoice::Term(d) => {
            out.push_str(item.c.as_deref().unwrap_or_default());
            out.push(':');
            term(&mut out, d);
        }
        VerbalChoice::Pair(c, d) => {
            term(&mut out, c);
            out.push(':');
            term(&mut out, d);
        }
    }
    (out, spans)
}

/// `context` followed by the item completed with `choice`.
pub fn render_verbal_prompt(context: &str, item: &VerbalItem, choice: usize) -> String {
    render_verbal_candidate(context, item, choice).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbalScore {
    pub selected: usize,
    pub scores: Vec<f64>,
    pub tied: bool,
    /// Context for the next item: the old one plus this item and its selection.
    pub new_context: String,
}

/// Score every candidate by the mean log probability of its scored terms
/// and select the highest. Ties go to the lowest index.
pub fn score_verbal_item(model: &dyn ModelClient, context: &str, item: &VerbalItem) -> Result<VerbalScore, ModelError> {
    let mut scores = Vec::with_capacity(item.choices.len());
    for i in 0..item.choices.len() {
        let (prompt, spans) = render_verbal_candidate(context, item, i);
        let completion = model.complete(&CompletionRequest::score(prompt))?;
        let score = mean_logprob(&completion.prompt_tokens, &spans)
            .ok_or_else(|| ModelError::Malformed("no log probabilities for the scored terms".into()))?;
        scores.push(score);
    }
    let (selected, tied) =
        argmax_lowest(&scores).ok_or_else(|| ModelError::Malformed("item has no choices".into()))?;
    if tied {
        info!("tie among verbal choices {:?}; selecting index {selected}", scores);
    }
    Ok(VerbalScore { selected, scores, tied, new_context: render_verbal_prompt(context, item, selected) })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn antonym() -> VerbalItem {
        VerbalItem {
            dataset: VerbalDataset::UclaVat,
            a: "love".into(),
            b: "hate".into(),
            c: Some("rich".into()),
            choices: vec![VerbalChoice::Term("poor".into()), VerbalChoice::Term("wealthy".into())],
            correct_index: 0,
            relation: "antonym".into(),
            distance: None,
        }
    }

    #[test]
    fn colon_notation() {
        let item = antonym();
        assert_eq!(render_verbal_prompt("", &item, 0), "love:hate::rich:poor");
        assert_eq!(render_verbal_prompt("x:y::z:w", &item, 1), "x:y::z:w\nlove:hate::rich:wealthy");
        let (p, spans) = render_verbal_candidate("", &item, 1);
        assert_eq!(&p[spans[0].clone()], "wealthy");
    }

    #[test]
    fn sat_pairs() {
        let item = VerbalItem {
            dataset: VerbalDataset::SatTurney,
            a: "ostrich".into(),
            b: "bird".into(),
            c: None,
            choices: (0..5).map(|k| VerbalChoice::Pair(format!("c{k}"), format!("d{k}"))).collect(),
            correct_index: 2,
            relation: String::new(),
            distance: None,
        };
        let (p, spans) = render_verbal_candidate("", &item, 3);
        assert_eq!(p, "ostrich:bird::c3:d3");
        assert_eq!(spans.iter().map(|s| &p[s.clone()]).collect::<Vec<_>>(), ["c3", "d3"]);
    }

    #[test]
    fn json_roundtrip_shape() {
        let v = serde_json::to_value(antonym().choices).unwrap();
        assert_eq!(v, serde_json::json!(["poor", "wealthy"]));
        let pair: VerbalChoice = serde_json::from_str(r#"["c","d"]"#).unwrap();
        assert_eq!(pair, VerbalChoice::Pair("c".into(), "d".into()));
    }

    #[test]
    fn dataset_names() {
        for d in VerbalDataset::ALL {
            assert_eq!(d.name().parse::<VerbalDataset>().unwrap(), d);
        }
        assert_eq!("ucla-vat".parse::<VerbalDataset>().unwrap(), VerbalDataset::UclaVat);
    }
}
