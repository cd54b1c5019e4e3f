//! Goals, proof search and proof outlines.
//!
//! [`normalize`] turns a parsed proposition into a [`Goal`]: proposition
//! variables (`var_` identifiers) become fresh constants, clauses that
//! still contain `?` variables become hypothesis rules, and conclusion
//! sentences become ground goal atoms.
//!
//! [`prove`] runs three phases. A bounded forward-chaining pass looks for a
//! fired constraint (`falsum :- ...`), which makes the goal inconsistent.
//! Then iterative-deepening backward chaining looks for a proof of all
//! conclusions of minimal height. If neither succeeds the verdict is
//! unknown and lists the most relevant stored clauses.

mod check;
mod engine;
mod outline;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bridge::{apply_forward, BridgeError, RuleSet, SpanMap, TranslationResult};
use crate::kb::KnowledgeBase;
use crate::logic::{parse_atom, print_formula, Atom, Clause, ClauseId, Head, SymbolRegistry, Term, FALSUM, VAR_PREFIX};
use crate::t2math::{Proposition, Section};

pub use check::{check_proof, check_verdict, ProofError};
pub use engine::prove;
pub use outline::{render_outline, render_verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferError {
    #[error("E_UNTRANSLATED: no rule reads sentence {index} `{sentence}`")]
    Untranslated { index: usize, sentence: String },
    #[error("E_UNRESOLVED_AMBIGUITY: sentence {index} `{sentence}` has {candidates} readings")]
    UnresolvedAmbiguity {
        index: usize,
        sentence: String,
        candidates: usize,
    },
    #[error("E_BAD_CHOICE: sentence {index} has no reading {choice}")]
    BadChoice { index: usize, choice: usize },
    #[error("E_BAD_CONCLUSION: conclusion `{clause}` is not a ground fact")]
    BadConclusion { clause: String },
    #[error("E_RANGE_RESTRICTION: hypothesis `{clause}` has head variables not bound by its body")]
    RangeRestriction { clause: String },
    #[error("E_INVALID_LIMITS: {0}")]
    InvalidLimits(String),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

impl InferError {
    pub fn code(&self) -> &'static str {
        match self {
            InferError::Untranslated { .. } => "E_UNTRANSLATED",
            InferError::UnresolvedAmbiguity { .. } => "E_UNRESOLVED_AMBIGUITY",
            InferError::BadChoice { .. } => "E_BAD_CHOICE",
            InferError::BadConclusion { .. } => "E_BAD_CONCLUSION",
            InferError::RangeRestriction { .. } => "E_RANGE_RESTRICTION",
            InferError::InvalidLimits(_) => "E_INVALID_LIMITS",
            InferError::Bridge(e) => e.code(),
        }
    }
}

/// A normalized proving task.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub hypotheses: Vec<Clause>,
    pub conclusions: Vec<Atom>,
    #[serde(default)]
    pub span_map: SpanMap,
    /// Fresh constant to the proposition variable it replaces.
    #[serde(default)]
    pub constants: BTreeMap<String, String>,
}

impl Goal {
    pub fn new(hypotheses: Vec<Clause>, conclusions: Vec<Atom>) -> Goal {
        Goal {
            hypotheses,
            conclusions,
            ..Goal::default()
        }
    }

    /// Symbols of hypotheses and conclusions.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.hypotheses.iter().flat_map(|c| c.symbols()).collect();
        for a in &self.conclusions {
            out.extend(Clause::fact(a.clone()).symbols());
        }
        out
    }

    /// Original math text for a term, if it stands for a proposition
    /// variable.
    pub fn raw_for(&self, term: &Term) -> Option<String> {
        let name = match term {
            Term::Constant(c) => self.constants.get(c)?,
            Term::Variable(v) => v,
            Term::Compound { .. } => return None,
        };
        self.span_map.raw_for_var(name).map(str::to_string)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub max_depth: u32,
    pub step_budget: u64,
    #[serde(with = "secs")]
    pub time_budget: Duration,
    pub term_depth: u32,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_depth: 8,
            step_budget: 1_000_000,
            time_budget: Duration::from_secs(10),
            term_depth: 2,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), InferError> {
        if self.max_depth == 0 || self.step_budget == 0 || self.time_budget.is_zero() || self.term_depth == 0 {
            return Err(InferError::InvalidLimits("all limits must be positive".into()));
        }
        Ok(())
    }
}

/// What justifies a proof node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// A stored clause.
    Clause(ClauseId),
    /// A goal hypothesis, by index.
    Hypothesis(usize),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Clause(id) => write!(f, "{id}"),
            Justification::Hypothesis(i) => write!(f, "h{i}"),
        }
    }
}

/// The atom proved at a node, or `falsum` at the root of a witness.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeAtom {
    Falsum,
    Atom(Atom),
}

impl fmt::Display for NodeAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeAtom::Falsum => f.write_str(FALSUM),
            NodeAtom::Atom(a) => write!(f, "{a}"),
        }
    }
}

impl Serialize for NodeAtom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NodeAtom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == FALSUM {
            return Ok(NodeAtom::Falsum);
        }
        parse_atom(&text).map(NodeAtom::Atom).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTree {
    pub atom: NodeAtom,
    pub justification: Justification,
    #[serde(default)]
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    /// Height in nodes: a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ProofTree::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Deepest iterative-deepening bound searched.
    pub depth_reached: u32,
    pub steps: u64,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// One proof per conclusion, in conclusion order.
    Proved { proofs: Vec<ProofTree> },
    Inconsistent { witness: ProofTree },
    Unknown { relevant: Vec<ClauseId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub budget_exhausted: bool,
    pub stats: Stats,
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self.outcome {
            Outcome::Proved { .. } => "proved",
            Outcome::Inconsistent { .. } => "inconsistent",
            Outcome::Unknown { .. } => "unknown",
        }
    }

    /// Proved or Inconsistent.
    pub fn is_conclusive(&self) -> bool {
        !matches!(self.outcome, Outcome::Unknown { .. })
    }

    pub fn unknown(relevant: Vec<ClauseId>) -> Verdict {
        Verdict {
            outcome: Outcome::Unknown { relevant },
            budget_exhausted: false,
            stats: Stats::default(),
        }
    }
}

/// Wire form: `{kind, proof?, relevant?, budget_exhausted, stats}`. For a
/// proved goal `proof` holds one tree per conclusion; for an inconsistent
/// one it holds the single witness tree.
#[derive(Serialize, Deserialize)]
struct VerdictWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    proof: Option<Vec<ProofTree>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relevant: Option<Vec<ClauseId>>,
    #[serde(default)]
    budget_exhausted: bool,
    #[serde(default)]
    stats: Stats,
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (proof, relevant) = match &self.outcome {
            Outcome::Proved { proofs } => (Some(proofs.clone()), None),
            Outcome::Inconsistent { witness } => (Some(vec![witness.clone()]), None),
            Outcome::Unknown { relevant } => (None, Some(relevant.clone())),
        };
        VerdictWire {
            kind: self.kind().to_string(),
            proof,
            relevant,
            budget_exhausted: self.budget_exhausted,
            stats: self.stats,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = VerdictWire::deserialize(d)?;
        let outcome = match w.kind.as_str() {
            "proved" => Outcome::Proved {
                proofs: w.proof.unwrap_or_default(),
            },
            "inconsistent" => {
                let mut p = w.proof.unwrap_or_default();
                if p.len() != 1 {
                    return Err(serde::de::Error::custom("an inconsistent verdict carries exactly one witness"));
                }
                Outcome::Inconsistent { witness: p.remove(0) }
            }
            "unknown" => Outcome::Unknown {
                relevant: w.relevant.unwrap_or_default(),
            },
            other => return Err(serde::de::Error::custom(format!("unknown verdict kind `{other}`"))),
        };
        Ok(Verdict {
            outcome,
            budget_exhausted: w.budget_exhausted,
            stats: w.stats,
        })
    }
}

/// Reading of one sentence during normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceReading {
    pub index: usize,
    pub section: Section,
    pub sentence: String,
    pub result: TranslationResult,
}

/// Translates every sentence of `prop` in document order. Sentence
/// indices are global and 0-based.
pub fn translate_all(prop: &Proposition, rules: &RuleSet) -> Result<Vec<SentenceReading>, InferError> {
    prop.sentences()
        .enumerate()
        .map(|(index, s)| {
            Ok(SentenceReading {
                index,
                section: s.section,
                sentence: s.text.clone(),
                result: apply_forward(rules, s)?,
            })
        })
        .collect()
}

/// [`normalize_with_choices`] without any disambiguation choices.
pub fn normalize(prop: &Proposition, rules: &RuleSet, kb: &KnowledgeBase) -> Result<Goal, InferError> {
    normalize_with_choices(prop, rules, kb, &BTreeMap::new())
}

/// Builds a goal. `choices` maps the global index of an ambiguous
/// sentence to the candidate to use.
pub fn normalize_with_choices(
    prop: &Proposition,
    rules: &RuleSet,
    kb: &KnowledgeBase,
    choices: &BTreeMap<usize, usize>,
) -> Result<Goal, InferError> {
    let mut span_map = SpanMap::default();
    let mut pieces: Vec<(Section, Clause)> = Vec::new();
    for r in translate_all(prop, rules)? {
        let clauses = match r.result {
            TranslationResult::Translated { clauses, span_map: m, .. } => {
                span_map.merge(&m);
                clauses
            }
            TranslationResult::Ambiguous { candidates, span_map: m } => {
                let Some(&choice) = choices.get(&r.index) else {
                    return Err(InferError::UnresolvedAmbiguity {
                        index: r.index,
                        sentence: r.sentence,
                        candidates: candidates.len(),
                    });
                };
                let Some(c) = candidates.into_iter().nth(choice) else {
                    return Err(InferError::BadChoice { index: r.index, choice });
                };
                span_map.merge(&m);
                c.clauses
            }
            TranslationResult::Unparsed { sentence } => {
                return Err(InferError::Untranslated {
                    index: r.index,
                    sentence,
                })
            }
        };
        pieces.extend(clauses.into_iter().map(|c| (r.section, c)));
    }
    let mut fresh = FreshConstants::new(kb.registry());
    let mut goal = Goal {
        span_map,
        ..Goal::default()
    };
    for (section, clause) in pieces {
        let clause = fresh.apply(&clause);
        if section == Section::Conclusion {
            if !clause.body.is_empty() || !clause.is_ground() || clause.head.is_falsum() {
                return Err(InferError::BadConclusion {
                    clause: print_formula(&clause),
                });
            }
            goal.conclusions.extend(clause.head.atoms().iter().cloned());
        } else {
            if !clause.is_range_restricted() {
                return Err(InferError::RangeRestriction {
                    clause: print_formula(&clause),
                });
            }
            goal.hypotheses.push(clause);
        }
    }
    goal.constants = fresh.by_constant;
    Ok(goal)
}

/// Replaces `var_` identifiers by constants `c_<name>` that clash with no
/// registered symbol.
struct FreshConstants<'a> {
    registry: &'a SymbolRegistry,
    by_var: BTreeMap<String, String>,
    by_constant: BTreeMap<String, String>,
}

impl<'a> FreshConstants<'a> {
    fn new(registry: &'a SymbolRegistry) -> Self {
        FreshConstants {
            registry,
            by_var: BTreeMap::new(),
            by_constant: BTreeMap::new(),
        }
    }

    fn constant_for(&mut self, var: &str) -> String {
        if let Some(c) = self.by_var.get(var) {
            return c.clone();
        }
        let base = format!("c_{}", var.strip_prefix(VAR_PREFIX).unwrap_or(var));
        let mut name = base.clone();
        let mut n = 2;
        while self.registry.contains(&name) || self.by_constant.contains_key(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.by_var.insert(var.to_string(), name.clone());
        self.by_constant.insert(name.clone(), var.to_string());
        name
    }

    fn apply(&mut self, clause: &Clause) -> Clause {
        let mut names: BTreeMap<String, String> = BTreeMap::new();
        let mut collect = |name: &str, names: &mut BTreeMap<String, String>| {
            if name.starts_with(VAR_PREFIX) && !names.contains_key(name) {
                names.insert(name.to_string(), self.constant_for(name));
            }
        };
        for atom in clause.head.atoms().iter().chain(&clause.body) {
            let mut vars = BTreeSet::new();
            atom.collect_variables(&mut vars);
            for v in &vars {
                collect(v, &mut names);
            }
            let (ident, _, _) = atom.key();
            collect(ident, &mut names);
        }
        let rename = |n: &str| names.get(n).cloned().unwrap_or_else(|| n.to_string());
        clause.map(
            &mut |t| {
                t.map_leaves(&mut |leaf| match leaf {
                    Term::Variable(v) if names.contains_key(v) => Term::Constant(names[v].clone()),
                    other => other.clone(),
                })
            },
            &mut |ident| rename(ident),
        )
    }
}

/// Full head of the justifying clause for a node, instantiated by
/// matching the node atom and children. Falls back to the node atom.
pub(crate) fn instantiated_head(clause: &Clause, node: &ProofTree) -> Vec<Atom> {
    let NodeAtom::Atom(atom) = &node.atom else {
        return Vec::new();
    };
    match &clause.head {
        Head::Atoms(atoms) if atoms.len() > 1 => check::instantiate_head(clause, node).unwrap_or_else(|| vec![atom.clone()]),
        _ => vec![atom.clone()],
    }
}
