use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{compile_pattern, BridgeError, Matcher};
use crate::logic::{parse_formula, Clause};
use crate::t2math::Section;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSection {
    #[default]
    Any,
    Declaration,
    Premise,
    Conclusion,
}

impl RuleSection {
    pub fn admits(self, section: Section) -> bool {
        match self {
            RuleSection::Any => true,
            RuleSection::Declaration => section == Section::Declaration,
            RuleSection::Premise => section == Section::Premise,
            RuleSection::Conclusion => section == Section::Conclusion,
        }
    }

    /// Section assumed for examples written without a keyword.
    pub fn default_section(self) -> Section {
        match self {
            RuleSection::Declaration => Section::Declaration,
            RuleSection::Conclusion => Section::Conclusion,
            RuleSection::Any | RuleSection::Premise => Section::Premise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReverseRecord {
    /// Clause text whose variables `?1`, `?2`, ... are the slots.
    pub clause_pattern: String,
    /// Sentence text with `#{n}` references to the slots.
    pub sentence_template: String,
}

/// Serialized form of a bridge rule, as stored in `rules.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub id: String,
    #[serde(default)]
    pub section: RuleSection,
    pub pattern: String,
    #[serde(default)]
    pub span_subpatterns: BTreeMap<usize, String>,
    pub template: String,
    #[serde(default)]
    pub examples: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse: Option<ReverseRecord>,
}

/// A compiled rule.
#[derive(Debug, Clone)]
pub struct PatternRule {
    pub record: RuleRecord,
    pub(crate) matcher: Matcher,
    /// Subpattern per top-level slot, with the `#{n}` number of its first
    /// group.
    pub(crate) subpatterns: BTreeMap<usize, (Matcher, usize)>,
    pub(crate) capture_total: usize,
    pub(crate) reverse_clause: Option<Clause>,
}

/// Template references: (`#{n}` or `?{n}`, n, byte range).
pub(crate) fn template_refs(template: &str) -> Vec<(char, usize, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if (bytes[i] == b'#' || bytes[i] == b'?') && bytes[i + 1] == b'{' {
            if let Some(close) = template[i + 2..].find('}') {
                let inner = &template[i + 2..i + 2 + close];
                if let Ok(n) = inner.parse::<usize>() {
                    let end = i + 2 + close + 1;
                    out.push((bytes[i] as char, n, i..end));
                    i = end;
                    continue;
                }
            }
        }
        i += 1;
    }
    out
}

impl PatternRule {
    pub fn compile(record: RuleRecord) -> Result<PatternRule, BridgeError> {
        let invalid = |message: String| BridgeError::InvalidRule {
            rule_id: record.id.clone(),
            message,
        };
        if record.id.trim().is_empty() {
            return Err(invalid("empty rule id".into()));
        }
        if record.examples.is_empty() {
            return Err(invalid("a rule needs at least one example sentence".into()));
        }
        let matcher = compile_pattern(&record.pattern)?;
        let slots = matcher.capture_count();
        let mut next = slots + 1;
        let mut subpatterns = BTreeMap::new();
        for (&slot, text) in &record.span_subpatterns {
            if slot == 0 || slot > slots {
                return Err(invalid(format!("span subpattern for slot {slot}, pattern has {slots} slots")));
            }
            let m = compile_pattern(text)?;
            let n = m.capture_count();
            subpatterns.insert(slot, (m, next));
            next += n;
        }
        let capture_total = next - 1;
        for (_, n, _) in template_refs(&record.template) {
            if n == 0 || n > capture_total {
                return Err(invalid(format!("template references #{{{n}}}, only {capture_total} captures")));
            }
        }
        let reverse_clause = match &record.reverse {
            None => None,
            Some(rev) => {
                let clause = parse_formula(&rev.clause_pattern).map_err(|e| BridgeError::TemplateSyntax {
                    rule_id: record.id.clone(),
                    text: rev.clause_pattern.clone(),
                    error: e,
                })?;
                let vars = clause.variables();
                for (_, n, _) in template_refs(&rev.sentence_template) {
                    if !vars.contains(&format!("?{n}")) {
                        return Err(invalid(format!("reverse template references #{{{n}}} but the clause pattern has no ?{n}")));
                    }
                }
                Some(clause)
            }
        };
        Ok(PatternRule {
            record,
            matcher,
            subpatterns,
            capture_total,
            reverse_clause,
        })
    }

    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn section(&self) -> RuleSection {
        self.record.section
    }

    pub fn matcher(&self) -> &Matcher {
        &self.matcher
    }
}

/// Immutable, ordered snapshot of rules. Adding a rule yields a new
/// snapshot and leaves existing ones untouched.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Arc<Vec<Arc<PatternRule>>>,
}

impl RuleSet {
    pub fn new() -> RuleSet {
        RuleSet::default()
    }

    pub fn from_records(records: Vec<RuleRecord>) -> Result<RuleSet, BridgeError> {
        let mut set = RuleSet::new();
        for r in records {
            set = set.with_rule(PatternRule::compile(r)?)?;
        }
        Ok(set)
    }

    /// Parses a JSON array of rule records.
    pub fn from_json(text: &str) -> Result<RuleSet, BridgeError> {
        let records: Vec<RuleRecord> = serde_json::from_str(text).map_err(|e| BridgeError::InvalidRule {
            rule_id: "<file>".into(),
            message: e.to_string(),
        })?;
        RuleSet::from_records(records)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("rule records serialize")
    }

    pub fn with_rule(&self, rule: PatternRule) -> Result<RuleSet, BridgeError> {
        if self.get(rule.id()).is_some() {
            return Err(BridgeError::DuplicateRule {
                rule_id: rule.id().to_string(),
            });
        }
        let mut rules: Vec<Arc<PatternRule>> = self.rules.as_ref().clone();
        rules.push(Arc::new(rule));
        Ok(RuleSet { rules: Arc::new(rules) })
    }

    pub fn get(&self, id: &str) -> Option<&PatternRule> {
        self.rules.iter().find(|r| r.id() == id).map(|r| r.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &PatternRule> {
        self.rules.iter().map(|r| r.as_ref())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn records(&self) -> Vec<RuleRecord> {
        self.iter().map(|r| r.record.clone()).collect()
    }
}
