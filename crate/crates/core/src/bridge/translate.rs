use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::rules::template_refs;
use super::{BridgeError, PatternRule, RuleSet, SPAN_BASE};
use crate::logic::{parse_program, print_formula, Atom, Clause, Head, Term, VAR_PREFIX};
use crate::t2math::{parse_sentence, Sentence};

/// Identifier for a math span: `var_` plus the alphanumeric characters of
/// the span, or `var_x<index>` when nothing is left.
pub fn var_name_of(raw: &str, index: usize) -> String {
    let kept: String = raw
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if kept.is_empty() {
        format!("{VAR_PREFIX}x{index}")
    } else {
        format!("{VAR_PREFIX}{kept}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanEntry {
    pub key: u32,
    pub raw: String,
    pub var: String,
    /// Range of the literal in [`SpanMap::text`].
    pub range: Range<usize>,
}

/// A sentence with its math spans replaced by literals, and the mapping
/// back.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanMap {
    pub text: String,
    pub entries: Vec<SpanEntry>,
}

impl SpanMap {
    pub fn raw_for_var(&self, var: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.var == var).map(|e| e.raw.as_str())
    }

    pub fn entry_at(&self, range: &Range<usize>) -> Option<&SpanEntry> {
        self.entries.iter().find(|e| &e.range == range)
    }

    /// Original sentence text, with `$...$` restored.
    pub fn reconstruct(&self) -> String {
        let mut out = String::new();
        let mut at = 0;
        for e in &self.entries {
            out.push_str(&self.text[at..e.range.start]);
            out.push('$');
            out.push_str(&e.raw);
            out.push('$');
            at = e.range.end;
        }
        out.push_str(&self.text[at..]);
        out
    }

    /// Appends the entries of `other` whose variable is not known yet.
    pub fn merge(&mut self, other: &SpanMap) {
        for e in &other.entries {
            if self.raw_for_var(&e.var).is_none() {
                self.entries.push(SpanEntry {
                    range: 0..0,
                    ..e.clone()
                });
            }
        }
    }
}

/// Assigns identifiers to raw span texts; equal raws share a name and
/// distinct raws never do.
#[derive(Debug, Clone, Default)]
struct Namer {
    by_raw: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Namer {
    fn name(&mut self, raw: &str, index: usize) -> String {
        if let Some(v) = self.by_raw.get(raw) {
            return v.clone();
        }
        let base = var_name_of(raw, index);
        let mut name = base.clone();
        let mut n = 2;
        while self.used.contains(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.used.insert(name.clone());
        self.by_raw.insert(raw.to_string(), name.clone());
        name
    }
}

fn substitute_with_namer(sentence: &Sentence) -> (SpanMap, Namer) {
    let mut namer = Namer::default();
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut at = 0;
    for (k, (range, span)) in sentence.local_spans().enumerate() {
        text.push_str(&sentence.text[at..range.start]);
        let key = SPAN_BASE + k as u32;
        let lit = key.to_string();
        let start = text.len();
        text.push_str(&lit);
        entries.push(SpanEntry {
            key,
            raw: span.raw.clone(),
            var: namer.name(&span.raw, k),
            range: start..text.len(),
        });
        at = range.end;
    }
    text.push_str(&sentence.text[at..]);
    (SpanMap { text, entries }, namer)
}

/// Replaces each math span of `sentence` by its literal.
pub fn substitute_spans(sentence: &Sentence) -> SpanMap {
    substitute_with_namer(sentence).0
}

fn words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Literal words of a pattern, skipping the class escapes.
fn pattern_words(pattern: &str) -> BTreeSet<String> {
    let stripped = pattern.replace("\\d+", " ").replace("\\w+", " ").replace("\\s+", " ");
    words(&stripped)
}

/// Rules sharing the most literal words with an unread sentence, best
/// first, at most `k`. Rules sharing no word are left out.
pub fn nearest_rules(rules: &RuleSet, sentence: &Sentence, k: usize) -> Vec<String> {
    let have = words(&substitute_spans(sentence).text);
    let mut scored: Vec<(usize, &str)> = rules
        .iter()
        .filter_map(|r| {
            let shared = pattern_words(&r.record.pattern).intersection(&have).count();
            (shared > 0).then_some((shared, r.id()))
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, id)| id.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub rule_id: String,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslationResult {
    Translated {
        clauses: Vec<Clause>,
        span_map: SpanMap,
        rule_id: String,
    },
    Ambiguous {
        candidates: Vec<Candidate>,
        span_map: SpanMap,
    },
    Unparsed {
        sentence: String,
    },
}

/// Matches one rule against a substituted sentence. `None` when the rule
/// does not apply.
fn apply_rule(
    rule: &PatternRule,
    map: &SpanMap,
    namer: &Namer,
) -> Option<Result<Vec<Clause>, BridgeError>> {
    let ranges = rule.matcher.capture_ranges(&map.text)?;
    let slots = ranges.len();
    let mut namer = namer.clone();
    // per capture number: (text pasted at #{n}, raw text)
    let mut values: Vec<(String, String)> = Vec::with_capacity(rule.capture_total);
    let mut raws = Vec::with_capacity(slots);
    for r in &ranges {
        match map.entry_at(r) {
            Some(e) => {
                values.push((e.var.clone(), e.raw.clone()));
                raws.push(e.raw.clone());
            }
            None => {
                let lit = map.text[r.clone()].to_string();
                values.push((lit.clone(), lit.clone()));
                raws.push(lit);
            }
        }
    }
    values.resize(rule.capture_total, (String::new(), String::new()));
    for (&slot, (m, first)) in &rule.subpatterns {
        let inner = m.captures(&raws[slot - 1])?;
        for (i, cap) in inner.into_iter().enumerate() {
            let var = namer.name(&cap, first + i);
            values[first + i - 1] = (var, cap);
        }
    }
    let template = &rule.record.template;
    let mut text = String::new();
    let mut at = 0;
    for (sigil, n, range) in template_refs(template) {
        text.push_str(&template[at..range.start]);
        let value = &values[n - 1].0;
        if sigil == '#' {
            text.push_str(value);
        } else {
            text.push('?');
            text.push_str(value.strip_prefix(VAR_PREFIX).unwrap_or(value));
        }
        at = range.end;
    }
    text.push_str(&template[at..]);
    Some(parse_program(&text).map_err(|error| BridgeError::TemplateSyntax {
        rule_id: rule.id().to_string(),
        text,
        error,
    }))
}

fn same_clauses(a: &[Clause], b: &[Clause]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_formula(y))
}

/// Translates one sentence with every rule admitting its section.
pub fn apply_forward(rules: &RuleSet, sentence: &Sentence) -> Result<TranslationResult, BridgeError> {
    let (map, namer) = substitute_with_namer(sentence);
    let mut candidates: Vec<Candidate> = Vec::new();
    for rule in rules.iter().filter(|r| r.section().admits(sentence.section)) {
        let Some(out) = apply_rule(rule, &map, &namer) else {
            continue;
        };
        let clauses = out?;
        if !candidates.iter().any(|c| same_clauses(&c.clauses, &clauses)) {
            candidates.push(Candidate {
                rule_id: rule.id().to_string(),
                clauses,
            });
        }
    }
    Ok(match candidates.len() {
        0 => TranslationResult::Unparsed {
            sentence: sentence.text.clone(),
        },
        1 => {
            let c = candidates.pop().expect("one candidate");
            TranslationResult::Translated {
                clauses: c.clauses,
                span_map: map,
                rule_id: c.rule_id,
            }
        }
        _ => TranslationResult::Ambiguous {
            candidates,
            span_map: map,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExampleStatus {
    Ok { clauses: Vec<Clause> },
    NoMatch,
    Ambiguous { clashing_rule: String },
    TemplateError { message: String },
    SentenceError { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleOutcome {
    /// Rule the example belongs to.
    pub rule_id: String,
    pub example: String,
    #[serde(flatten)]
    pub status: ExampleStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rule_id: String,
    pub outcomes: Vec<ExampleOutcome>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.outcomes.iter().all(|o| matches!(o.status, ExampleStatus::Ok { .. }))
    }

    /// The first failure as an error.
    pub fn into_result(self) -> Result<(), BridgeError> {
        for o in self.outcomes {
            match o.status {
                ExampleStatus::Ok { .. } => {}
                ExampleStatus::NoMatch => {
                    return Err(BridgeError::ExampleNoMatch {
                        rule_id: o.rule_id,
                        example: o.example,
                    })
                }
                ExampleStatus::Ambiguous { clashing_rule } => {
                    return Err(BridgeError::EditTimeAmbiguity {
                        rule_id: o.rule_id,
                        example: o.example,
                        clashing_rule,
                    })
                }
                ExampleStatus::TemplateError { message } | ExampleStatus::SentenceError { message } => {
                    return Err(BridgeError::InvalidRule {
                        rule_id: o.rule_id,
                        message: format!("example `{}`: {message}", o.example),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Output of `rule` on `sentence`, if the rule applies.
fn rule_output(rule: &PatternRule, sentence: &Sentence) -> Option<Result<Vec<Clause>, BridgeError>> {
    if !rule.section().admits(sentence.section) {
        return None;
    }
    let (map, namer) = substitute_with_namer(sentence);
    apply_rule(rule, &map, &namer)
}

/// Checks a new rule against its own examples and against the examples of
/// the rules already registered. A rule passes when each of its examples
/// matches it, and no example (old or new) is read differently by the new
/// rule and another one.
pub fn validate_rule(existing: &RuleSet, new: &PatternRule) -> Result<ValidationReport, BridgeError> {
    if existing.get(new.id()).is_some() {
        return Err(BridgeError::DuplicateRule {
            rule_id: new.id().to_string(),
        });
    }
    let mut outcomes = Vec::new();
    for example in &new.record.examples {
        let status = match parse_sentence(example, new.section().default_section()) {
            Err(e) => ExampleStatus::SentenceError { message: e.to_string() },
            Ok(sentence) => match rule_output(new, &sentence) {
                None => ExampleStatus::NoMatch,
                Some(Err(e)) => ExampleStatus::TemplateError { message: e.to_string() },
                Some(Ok(clauses)) => {
                    let clash = existing.iter().find(|r| {
                        matches!(rule_output(r, &sentence), Some(Ok(other)) if !same_clauses(&other, &clauses))
                    });
                    match clash {
                        Some(r) => ExampleStatus::Ambiguous {
                            clashing_rule: r.id().to_string(),
                        },
                        None => ExampleStatus::Ok { clauses },
                    }
                }
            },
        };
        outcomes.push(ExampleOutcome {
            rule_id: new.id().to_string(),
            example: example.clone(),
            status,
        });
    }
    for rule in existing.iter() {
        for example in &rule.record.examples {
            let Ok(sentence) = parse_sentence(example, rule.section().default_section()) else {
                continue;
            };
            let Some(Ok(new_out)) = rule_output(new, &sentence) else {
                continue;
            };
            let differs = match rule_output(rule, &sentence) {
                Some(Ok(old)) => !same_clauses(&old, &new_out),
                _ => true,
            };
            if differs {
                outcomes.push(ExampleOutcome {
                    rule_id: rule.id().to_string(),
                    example: example.clone(),
                    status: ExampleStatus::Ambiguous {
                        clashing_rule: new.id().to_string(),
                    },
                });
            }
        }
    }
    Ok(ValidationReport {
        rule_id: new.id().to_string(),
        outcomes,
    })
}

fn match_term(pattern: &Term, term: &Term, binding: &mut BTreeMap<String, Term>) -> bool {
    match pattern {
        Term::Variable(v) => match binding.get(v) {
            Some(bound) => bound == term,
            None => {
                binding.insert(v.clone(), term.clone());
                true
            }
        },
        Term::Constant(c) => matches!(term, Term::Constant(d) if c == d),
        Term::Compound { functor, args } => match term {
            Term::Compound { functor: f, args: a } if f == functor && a.len() == args.len() => {
                args.iter().zip(a).all(|(p, t)| match_term(p, t, binding))
            }
            _ => false,
        },
    }
}

fn match_atom(pattern: &Atom, atom: &Atom, binding: &mut BTreeMap<String, Term>) -> bool {
    match (pattern, atom) {
        (Atom::Predicate { name: n1, args: a1 }, Atom::Predicate { name: n2, args: a2 }) => {
            n1 == n2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(p, t)| match_term(p, t, binding))
        }
        (
            Atom::Membership { instance: i1, class: c1 },
            Atom::Membership { instance: i2, class: c2 },
        ) => c1 == c2 && match_term(i1, i2, binding),
        (
            Atom::Frame {
                instance: i1,
                attribute: a1,
                value: v1,
            },
            Atom::Frame {
                instance: i2,
                attribute: a2,
                value: v2,
            },
        ) => a1 == a2 && match_term(i1, i2, binding) && match_term(v1, v2, binding),
        _ => false,
    }
}

/// One-way match of a clause pattern onto a clause.
fn match_clause(pattern: &Clause, clause: &Clause) -> Option<BTreeMap<String, Term>> {
    let mut binding = BTreeMap::new();
    let heads_ok = match (&pattern.head, &clause.head) {
        (Head::Falsum, Head::Falsum) => true,
        (Head::Atoms(p), Head::Atoms(c)) => {
            p.len() == c.len() && p.iter().zip(c).all(|(x, y)| match_atom(x, y, &mut binding))
        }
        _ => false,
    };
    let body_ok = pattern.body.len() == clause.body.len()
        && pattern
            .body
            .iter()
            .zip(&clause.body)
            .all(|(x, y)| match_atom(x, y, &mut binding));
    (heads_ok && body_ok).then_some(binding)
}

/// Renders a clause as a sentence with the first reverse rule that
/// matches it. Variables are shown as their original math text when the
/// span map knows them. Falls back to the clause text.
pub fn apply_reverse(rules: &RuleSet, clause: &Clause, span_map: &SpanMap) -> String {
    apply_reverse_with(rules, clause, &|t: &Term| match t {
        Term::Variable(v) => span_map.raw_for_var(v).map(str::to_string),
        _ => None,
    })
}

/// Like [`apply_reverse`], with a caller-supplied lookup for terms.
pub fn apply_reverse_with(rules: &RuleSet, clause: &Clause, resolve: &dyn Fn(&Term) -> Option<String>) -> String {
    for rule in rules.iter() {
        let (Some(pattern), Some(rev)) = (&rule.reverse_clause, &rule.record.reverse) else {
            continue;
        };
        let Some(binding) = match_clause(pattern, clause) else {
            continue;
        };
        let template = &rev.sentence_template;
        let mut out = String::new();
        let mut at = 0;
        for (_, n, range) in template_refs(template) {
            out.push_str(&template[at..range.start]);
            if let Some(t) = binding.get(&format!("?{n}")) {
                out.push_str(&render_term(t, resolve));
            }
            at = range.end;
        }
        out.push_str(&template[at..]);
        return out;
    }
    print_formula(clause)
}

fn render_term(term: &Term, resolve: &dyn Fn(&Term) -> Option<String>) -> String {
    if let Some(s) = resolve(term) {
        return s;
    }
    match term {
        Term::Variable(v) => v.strip_prefix(VAR_PREFIX).unwrap_or(v).to_string(),
        other => other.to_string(),
    }
}
