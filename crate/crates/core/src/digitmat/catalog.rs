//! The digit-matrix subtype taxonomy and the two experiment bundles.

use std::fmt;

use crate::digitmat::rules::{LogicOp, TransformKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OneRule {
    ConstantRow,
    ConstantCol,
    /// Latin square whose rows rotate left.
    Dist3Left,
    /// Latin square whose rows rotate right.
    Dist3Right,
    Progression1,
    Progression2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnionLine {
    First,
    Middle,
    Last,
}

impl UnionLine {
    pub fn index(self) -> usize {
        match self {
            UnionLine::First => 0,
            UnionLine::Middle => 1,
            UnionLine::Last => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubtypeSpec {
    OneRule(OneRule),
    /// Multiset of rule kinds, one per slot.
    MultiRule(Vec<TransformKind>),
    Logic { op: LogicOp, target: UnionLine, aligned: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subtype {
    pub name: String,
    pub spec: SubtypeSpec,
}

impl Subtype {
    /// Number of transformation rules; 0 for logic problems.
    pub fn rule_count(&self) -> u8 {
        match &self.spec {
            SubtypeSpec::OneRule(_) => 1,
            SubtypeSpec::MultiRule(k) => k.len() as u8,
            SubtypeSpec::Logic { .. } => 0,
        }
    }

    pub fn is_logic(&self) -> bool {
        matches!(self.spec, SubtypeSpec::Logic { .. })
    }

    /// Group label used in reports: "1-rule" .. "5-rule" or "logic".
    pub fn problem_type(&self) -> String {
        match self.rule_count() {
            0 => "logic".to_string(),
            n => format!("{n}-rule"),
        }
    }
}

impl fmt::Display for Subtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

// Four- and five-rule subtypes sampled once (seed 20230731) from all
// multisets of that size and frozen here.
const FOUR_RULE: [&str; 10] = [
    "CCCD", "CCCP", "CCPP", "CDDD", "CPPP", "DDDD", "DDDP", "DDPP", "DPPP", "PPPP",
];
const FIVE_RULE: [&str; 10] = [
    "CCCCP", "CCCDP", "CCDDP", "CCDPP", "CCPPP", "CPPPP", "DDDDD", "DDDPP", "DDPPP", "DPPPP",
];

fn kinds(code: &str) -> Vec<TransformKind> {
    code.chars()
        .map(|c| match c {
            'C' => TransformKind::Constant,
            'D' => TransformKind::Dist3,
            'P' => TransformKind::Progression,
            _ => unreachable!("bad rule code {c}"),
        })
        .collect()
}

fn multisets(k: usize) -> Vec<String> {
    fn go(k: usize, from: usize, cur: &mut String, out: &mut Vec<String>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for (i, ch) in ['C', 'D', 'P'].into_iter().enumerate().skip(from) {
            cur.push(ch);
            go(k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, 0, &mut String::new(), &mut out);
    out
}

fn one_rule() -> Vec<Subtype> {
    [
        ("1r-constant-row", OneRule::ConstantRow),
        ("1r-constant-col", OneRule::ConstantCol),
        ("1r-dist3-left", OneRule::Dist3Left),
        ("1r-dist3-right", OneRule::Dist3Right),
        ("1r-progression-1", OneRule::Progression1),
        ("1r-progression-2", OneRule::Progression2),
    ]
    .into_iter()
    .map(|(n, r)| Subtype { name: n.to_string(), spec: SubtypeSpec::OneRule(r) })
    .collect()
}

fn multi_rule(codes: impl IntoIterator<Item = String>) -> Vec<Subtype> {
    codes
        .into_iter()
        .map(|code| Subtype {
            name: format!("{}r-{code}", code.len()),
            spec: SubtypeSpec::MultiRule(kinds(&code)),
        })
        .collect()
}

fn logic() -> Vec<Subtype> {
    let mut out = Vec::new();
    for aligned in [true, false] {
        let layout = if aligned { "aligned" } else { "permuted" };
        let variants = [
            ("or-first", LogicOp::Or, UnionLine::First),
            ("or-middle", LogicOp::Or, UnionLine::Middle),
            ("or-last", LogicOp::Or, UnionLine::Last),
            ("and", LogicOp::And, UnionLine::Last),
            ("xor", LogicOp::Xor, UnionLine::Last),
        ];
        for (tag, op, target) in variants {
            out.push(Subtype {
                name: format!("logic-{layout}-{tag}"),
                spec: SubtypeSpec::Logic { op, target, aligned },
            });
        }
    }
    out
}

/// Every subtype, grouped by problem type.
#[derive(Debug, Clone)]
pub struct SubtypeCatalog {
    pub one_rule: Vec<Subtype>,
    pub two_rule: Vec<Subtype>,
    pub three_rule: Vec<Subtype>,
    pub four_rule: Vec<Subtype>,
    pub five_rule: Vec<Subtype>,
    pub logic: Vec<Subtype>,
}

impl SubtypeCatalog {
    pub fn new() -> Self {
        SubtypeCatalog {
            one_rule: one_rule(),
            two_rule: multi_rule(multisets(2)),
            three_rule: multi_rule(multisets(3)),
            four_rule: multi_rule(FOUR_RULE.iter().map(|s| s.to_string())),
            five_rule: multi_rule(FIVE_RULE.iter().map(|s| s.to_string())),
            logic: logic(),
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Subtype> {
        self.one_rule
            .iter()
            .chain(&self.two_rule)
            .chain(&self.three_rule)
            .chain(&self.four_rule)
            .chain(&self.five_rule)
            .chain(&self.logic)
    }

    pub fn get(&self, name: &str) -> Option<&Subtype> {
        self.all().find(|s| s.name == name)
    }

    /// The 32 subtypes of the first experiment: one-, two-, three-rule and logic.
    pub fn exp1(&self) -> Vec<Subtype> {
        self.one_rule
            .iter()
            .chain(&self.two_rule)
            .chain(&self.three_rule)
            .chain(&self.logic)
            .cloned()
            .collect()
    }

    /// The 42 transformation subtypes in presentation order (easy to hard).
    pub fn exp2(&self) -> Vec<Subtype> {
        self.one_rule
            .iter()
            .chain(&self.two_rule)
            .chain(&self.three_rule)
            .chain(&self.four_rule)
            .chain(&self.five_rule)
            .cloned()
            .collect()
    }

    /// Resolve a comma-separated list of subtype names and bundle names.
    pub fn resolve(&self, list: &str) -> Result<Vec<Subtype>, String> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "exp1" => out.extend(self.exp1()),
                "exp2" => out.extend(self.exp2()),
                "all" => out.extend(self.all().cloned()),
                _ => out.push(self.get(name).cloned().ok_or_else(|| format!("unknown subtype {name:?}"))?),
            }
        }
        Ok(out)
    }
}

impl Default for SubtypeCatalog {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_counts() {
        let c = SubtypeCatalog::new();
        assert_eq!(c.one_rule.len(), 6);
        assert_eq!(c.two_rule.len(), 6);
        assert_eq!(c.three_rule.len(), 10);
        assert_eq!(c.four_rule.len(), 10);
        assert_eq!(c.five_rule.len(), 10);
        assert_eq!(c.logic.len(), 10);
        assert_eq!(c.exp1().len(), 32);
        assert_eq!(c.exp2().len(), 42);
        let or_aligned = c.logic.iter().filter(|s| s.name.starts_with("logic-aligned-or")).count();
        assert_eq!(or_aligned, 3);
    }

    #[test]
    fn multi_rule_entries_are_multisets() {
        let c = SubtypeCatalog::new();
        let all4 = multisets(4);
        let all5 = multisets(5);
        assert_eq!(all4.len(), 15);
        assert_eq!(all5.len(), 21);
        for s in &c.four_rule {
            assert!(all4.contains(&s.name[3..].to_string()));
        }
        for s in &c.five_rule {
            assert!(all5.contains(&s.name[3..].to_string()));
        }
        let names: std::collections::HashSet<_> = c.all().map(|s| s.name.clone()).collect();
        assert_eq!(names.len(), 6 + 6 + 10 + 10 + 10 + 10);
    }

    #[test]
    fn exp2_order_starts_with_constants() {
        let c = SubtypeCatalog::new();
        let order: Vec<_> = c.exp2().iter().take(6).map(|s| s.name.clone()).collect();
        assert_eq!(&order[..2], ["1r-constant-row", "1r-constant-col"]);
        assert!(order[2].contains("dist3") && order[3].contains("dist3"));
        assert!(order[4].contains("progression") && order[5].contains("progression"));
        let counts: Vec<u8> = c.exp2().iter().map(Subtype::rule_count).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn resolve_bundles() {
        let c = SubtypeCatalog::new();
        assert_eq!(c.resolve("exp1").unwrap().len(), 32);
        assert_eq!(c.resolve("1r-constant-row, 2r-CD").unwrap().len(), 2);
        assert!(c.resolve("nope").is_err());
    }
}
