//! Versioned store for clauses and the literature layer (publications,
//! pages, annotations), plus relevance ranking over the symbol graph.

mod persist;
mod revlog;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{validate_rule, BridgeError, PatternRule, RuleRecord, RuleSet};
use crate::logic::{print_formula, Clause, ClauseId, LogicError, SymbolRegistry};

pub use persist::{Bundle, BundleClause};
pub use revlog::{revision_id, verify, verify_chain, Revision};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("E_RANGE_RESTRICTION: `{clause}` has head variables not bound by its body")]
    RangeRestriction { clause: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("E_PAGE_CYCLE: page `{page}` is its own ancestor")]
    PageCycle { page: String },
    #[error("E_EMPTY_COMMIT: nothing to commit")]
    EmptyCommit,
    #[error("E_NOT_FOUND: no {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error("E_INVALID: {0}")]
    Invalid(String),
    #[error("E_CORRUPT: {0}")]
    Corrupt(String),
    #[error("E_IO: {0}")]
    Io(#[from] std::io::Error),
}

impl KbError {
    pub fn code(&self) -> &'static str {
        match self {
            KbError::RangeRestriction { .. } => "E_RANGE_RESTRICTION",
            KbError::Logic(e) => e.code(),
            KbError::Bridge(e) => e.code(),
            KbError::PageCycle { .. } => "E_PAGE_CYCLE",
            KbError::EmptyCommit => "E_EMPTY_COMMIT",
            KbError::NotFound { .. } => "E_NOT_FOUND",
            KbError::Invalid(_) => "E_INVALID",
            KbError::Corrupt(_) => "E_CORRUPT",
            KbError::Io(_) => "E_IO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub source_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub id: String,
    pub publication_id: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub rank: i64,
    pub title: String,
    #[serde(default)]
    pub body: String,
}

/// Links a byte range of one page body to the clauses formalizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub page_id: String,
    pub byte_range: Range<usize>,
    pub clause_ids: Vec<ClauseId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TocNode {
    pub page_id: String,
    pub title: String,
    pub children: Vec<TocNode>,
}

/// Result of storing a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssertReport {
    pub id: ClauseId,
    /// An earlier clause with the same formula, if any.
    pub duplicate_of: Option<ClauseId>,
}

/// One pending change, as serialized into a revision's change set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Change {
    AddClause {
        id: ClauseId,
        clause: Clause,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        provenance: Option<String>,
    },
    RemoveClause { id: ClauseId },
    PutPublication { publication: Publication },
    PutPage { page: Page },
    PutAnnotation { annotation: AnnotationRecord },
    AddRule { rule: RuleRecord },
    SetDoc { symbol: String, doc: String },
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    clauses: BTreeMap<ClauseId, Clause>,
    registry: SymbolRegistry,
    next_clause: u64,
    next_annotation: u64,
    publications: BTreeMap<String, Publication>,
    pages: BTreeMap<String, Page>,
    annotations: BTreeMap<String, AnnotationRecord>,
    rules: RuleSet,
    history: Vec<Revision>,
    pending: Vec<Change>,
}

impl KnowledgeBase {
    pub fn new() -> KnowledgeBase {
        KnowledgeBase {
            next_clause: 1,
            next_annotation: 1,
            ..Default::default()
        }
    }

    pub fn registry(&self) -> &SymbolRegistry {
        &self.registry
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.get(&id)
    }

    /// Clauses in id order.
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.values()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn publications(&self) -> impl Iterator<Item = &Publication> {
        self.publications.values()
    }

    pub fn pages(&self) -> impl Iterator<Item = &Page> {
        self.pages.values()
    }

    pub fn page(&self, id: &str) -> Option<&Page> {
        self.pages.get(id)
    }

    pub fn annotations(&self) -> impl Iterator<Item = &AnnotationRecord> {
        self.annotations.values()
    }

    pub fn annotation(&self, id: &str) -> Option<&AnnotationRecord> {
        self.annotations.get(id)
    }

    pub fn history(&self) -> &[Revision] {
        &self.history
    }

    pub fn head_revision(&self) -> Option<&str> {
        self.history.last().map(|r| r.id.as_str())
    }

    pub fn pending(&self) -> &[Change] {
        &self.pending
    }

    /// Stores a clause under a fresh id. Its symbols are registered and
    /// linked in the co-occurrence graph.
    pub fn assert_clause(&mut self, clause: Clause, provenance: Option<String>) -> Result<AssertReport, KbError> {
        let id = ClauseId(self.next_clause);
        self.insert_clause(id, clause, provenance)?;
        let duplicate_of = self
            .clauses
            .iter()
            .find(|(other, c)| **other != id && c.same_formula(&self.clauses[&id]))
            .map(|(other, _)| *other);
        if let Some(dup) = duplicate_of {
            tracing::warn!(clause = %id, duplicate_of = %dup, "duplicate clause stored");
        }
        Ok(AssertReport { id, duplicate_of })
    }

    pub(crate) fn insert_clause(
        &mut self,
        id: ClauseId,
        mut clause: Clause,
        provenance: Option<String>,
    ) -> Result<(), KbError> {
        if !clause.is_range_restricted() {
            return Err(KbError::RangeRestriction {
                clause: print_formula(&clause),
            });
        }
        if self.clauses.contains_key(&id) {
            return Err(KbError::Invalid(format!("clause id {id} already in use")));
        }
        self.registry.register_clause(&clause)?;
        clause.id = Some(id);
        clause.provenance = provenance.clone();
        self.pending.push(Change::AddClause {
            id,
            clause: clause.clone(),
            provenance,
        });
        self.clauses.insert(id, clause);
        self.next_clause = self.next_clause.max(id.0 + 1);
        Ok(())
    }

    /// Removes a clause. Symbols stay registered; co-occurrence counts
    /// are recomputed from the remaining clauses.
    pub fn retract_clause(&mut self, id: ClauseId) -> Result<Clause, KbError> {
        let clause = self.clauses.remove(&id).ok_or_else(|| KbError::NotFound {
            kind: "clause",
            id: id.to_string(),
        })?;
        let mut registry = SymbolRegistry::default();
        for (name, entry) in self.registry.iter() {
            registry.register(name, entry.kind, entry.arity)?;
            registry.set_doc(name, entry.doc.clone());
        }
        for c in self.clauses.values() {
            registry.register_clause(c)?;
        }
        self.registry = registry;
        self.pending.push(Change::RemoveClause { id });
        Ok(clause)
    }

    pub fn set_doc(&mut self, symbol: &str, doc: &str) -> Result<(), KbError> {
        if !self.registry.set_doc(symbol, doc) {
            return Err(KbError::NotFound {
                kind: "symbol",
                id: symbol.to_string(),
            });
        }
        self.pending.push(Change::SetDoc {
            symbol: symbol.to_string(),
            doc: doc.to_string(),
        });
        Ok(())
    }

    /// Validates a rule against the registered ones and adds it.
    pub fn add_rule(&mut self, record: RuleRecord) -> Result<(), KbError> {
        let rule = PatternRule::compile(record.clone())?;
        validate_rule(&self.rules, &rule)?.into_result()?;
        self.rules = self.rules.with_rule(rule)?;
        self.pending.push(Change::AddRule { rule: record });
        Ok(())
    }

    pub(crate) fn set_rules(&mut self, rules: RuleSet) {
        self.rules = rules;
    }

    pub fn put_publication(&mut self, publication: Publication) -> Result<(), KbError> {
        if publication.id.trim().is_empty() {
            return Err(KbError::Invalid("publication id is empty".into()));
        }
        self.publications.insert(publication.id.clone(), publication.clone());
        self.pending.push(Change::PutPublication { publication });
        Ok(())
    }

    /// Creates or replaces a page. Rejected if the page's publication is
    /// unknown, its parent is unknown or in another publication, or the
    /// new parent link would close a cycle.
    pub fn put_page(&mut self, page: Page) -> Result<(), KbError> {
        if !self.publications.contains_key(&page.publication_id) {
            return Err(KbError::NotFound {
                kind: "publication",
                id: page.publication_id.clone(),
            });
        }
        if let Some(parent) = &page.parent {
            let p = self.pages.get(parent).filter(|_| parent != &page.id);
            match p {
                Some(p) if p.publication_id != page.publication_id => {
                    return Err(KbError::Invalid(format!(
                        "parent `{parent}` belongs to another publication"
                    )))
                }
                Some(_) => {}
                None if parent == &page.id => return Err(KbError::PageCycle { page: page.id.clone() }),
                None => {
                    return Err(KbError::NotFound {
                        kind: "page",
                        id: parent.clone(),
                    })
                }
            }
            let mut at = Some(parent.clone());
            while let Some(cur) = at {
                if cur == page.id {
                    return Err(KbError::PageCycle { page: page.id.clone() });
                }
                at = self.pages.get(&cur).and_then(|p| p.parent.clone());
            }
        }
        if let Some(old) = self.pages.get(&page.id) {
            if old.body != page.body && self.annotations.values().any(|a| a.page_id == page.id && a.byte_range.end > page.body.len()) {
                return Err(KbError::Invalid(format!(
                    "page `{}` body is shorter than one of its annotations",
                    page.id
                )));
            }
        }
        self.pages.insert(page.id.clone(), page.clone());
        self.pending.push(Change::PutPage { page });
        Ok(())
    }

    /// Inserts a page without checks. Used when loading a store so that
    /// `toc` can report damage instead of refusing to load.
    pub(crate) fn put_page_unchecked(&mut self, page: Page) {
        self.pages.insert(page.id.clone(), page);
    }

    /// Records an annotation over `byte_range` of one page body.
    pub fn annotate(
        &mut self,
        page_id: &str,
        byte_range: Range<usize>,
        clause_ids: Vec<ClauseId>,
    ) -> Result<String, KbError> {
        let id = format!("a{}", self.next_annotation);
        let record = AnnotationRecord {
            id: id.clone(),
            page_id: page_id.to_string(),
            byte_range,
            clause_ids,
        };
        self.check_annotation(&record)?;
        self.next_annotation += 1;
        self.annotations.insert(id.clone(), record.clone());
        self.pending.push(Change::PutAnnotation { annotation: record });
        Ok(id)
    }

    /// Asserts `clauses` with the new annotation as provenance and
    /// records the annotation.
    pub fn annotate_with_clauses(
        &mut self,
        page_id: &str,
        byte_range: Range<usize>,
        clauses: Vec<Clause>,
    ) -> Result<String, KbError> {
        let id = format!("a{}", self.next_annotation);
        let probe = AnnotationRecord {
            id: id.clone(),
            page_id: page_id.to_string(),
            byte_range: byte_range.clone(),
            clause_ids: vec![ClauseId(0)],
        };
        self.check_span(&probe)?;
        if clauses.is_empty() {
            return Err(KbError::Invalid("an annotation needs at least one clause".into()));
        }
        let mut staged = self.clone();
        let mut ids = Vec::new();
        for c in clauses {
            ids.push(staged.assert_clause(c, Some(id.clone()))?.id);
        }
        staged.annotate(page_id, byte_range, ids)?;
        *self = staged;
        Ok(id)
    }

    fn check_span(&self, record: &AnnotationRecord) -> Result<(), KbError> {
        let page = self.pages.get(&record.page_id).ok_or_else(|| KbError::NotFound {
            kind: "page",
            id: record.page_id.clone(),
        })?;
        let r = &record.byte_range;
        if r.start > r.end || r.end > page.body.len() || !page.body.is_char_boundary(r.start) || !page.body.is_char_boundary(r.end) {
            return Err(KbError::Invalid(format!(
                "annotation range {}..{} outside page `{}`",
                r.start, r.end, page.id
            )));
        }
        Ok(())
    }

    pub(crate) fn check_annotation(&self, record: &AnnotationRecord) -> Result<(), KbError> {
        self.check_span(record)?;
        if record.clause_ids.is_empty() {
            return Err(KbError::Invalid("an annotation needs at least one clause".into()));
        }
        for id in &record.clause_ids {
            if !self.clauses.contains_key(id) {
                return Err(KbError::NotFound {
                    kind: "clause",
                    id: id.to_string(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn put_annotation_unchecked(&mut self, record: AnnotationRecord) {
        if let Some(n) = record.id.strip_prefix('a').and_then(|n| n.parse::<u64>().ok()) {
            self.next_annotation = self.next_annotation.max(n + 1);
        }
        self.annotations.insert(record.id.clone(), record);
    }

    /// Table of contents of one publication: root pages and their
    /// descendants, siblings ordered by (rank, title).
    pub fn toc(&self, publication_id: &str) -> Result<Vec<TocNode>, KbError> {
        toc(self.pages.values().filter(|p| p.publication_id == publication_id))
    }

    /// Clauses ranked by relevance to `goal_symbols`: first by Jaccard
    /// similarity of symbol sets, then clauses sharing no symbol but
    /// within two co-occurrence hops of the goal.
    pub fn relevant_facts(&self, goal_symbols: &BTreeSet<String>, k: usize) -> Vec<ClauseId> {
        let mut scored = Vec::new();
        let mut zero = Vec::new();
        for (id, c) in &self.clauses {
            let syms = c.symbols();
            let inter = syms.intersection(goal_symbols).count();
            if inter > 0 {
                let union = syms.union(goal_symbols).count();
                scored.push((inter, union, syms.len(), *id));
            } else {
                zero.push((syms, *id));
            }
        }
        // a/b > c/d  <=>  a*d > c*b
        scored.sort_by(|x, y| {
            (y.0 * x.1)
                .cmp(&(x.0 * y.1))
                .then(x.2.cmp(&y.2))
                .then(x.3.cmp(&y.3))
        });
        let mut out: Vec<ClauseId> = scored.into_iter().map(|s| s.3).collect();
        if out.len() < k {
            let dist = self.symbol_distances(goal_symbols, 2);
            let mut reach: Vec<(usize, usize, ClauseId)> = zero
                .into_iter()
                .filter_map(|(syms, id)| {
                    let hop = syms.iter().filter_map(|s| dist.get(s)).min()?;
                    Some((*hop, syms.len(), id))
                })
                .collect();
            reach.sort();
            out.extend(reach.into_iter().map(|r| r.2));
        }
        out.truncate(k);
        out
    }

    /// Breadth-first distances from the goal symbols over co-occurrence
    /// edges, up to `max_hops`.
    fn symbol_distances(&self, goal: &BTreeSet<String>, max_hops: usize) -> BTreeMap<String, usize> {
        let mut dist: BTreeMap<String, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in goal {
            dist.insert(s.clone(), 0);
            queue.push_back(s.clone());
        }
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            if d == max_hops {
                continue;
            }
            let Some(entry) = self.registry.get(&s) else { continue };
            for n in entry.co_occurrence.keys() {
                if !dist.contains_key(n) {
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n.clone());
                }
            }
        }
        dist
    }

    /// Appends a revision covering all pending changes.
    pub fn commit(&mut self, author: &str, message: &str, timestamp_ms: i64) -> Result<&Revision, KbError> {
        if self.pending.is_empty() {
            return Err(KbError::EmptyCommit);
        }
        let changeset = serde_json::to_string(&self.pending).map_err(|e| KbError::Invalid(e.to_string()))?;
        let parent = self.head_revision().map(str::to_string);
        let rev = Revision::new(parent, author, timestamp_ms, message, changeset);
        self.history.push(rev);
        self.pending.clear();
        Ok(self.history.last().expect("just pushed"))
    }

    /// Commits with the current wall-clock time.
    pub fn commit_now(&mut self, author: &str, message: &str) -> Result<&Revision, KbError> {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        self.commit(author, message, now)
    }

    pub(crate) fn set_history(&mut self, history: Vec<Revision>) {
        self.history = history;
    }

    pub(crate) fn clear_pending(&mut self) {
        self.pending.clear();
    }
}

/// Builds the page forest. Fails on a cycle or a dangling parent inside
/// the given set.
pub fn toc<'a>(pages: impl IntoIterator<Item = &'a Page>) -> Result<Vec<TocNode>, KbError> {
    let pages: BTreeMap<&str, &Page> = pages.into_iter().map(|p| (p.id.as_str(), p)).collect();
    for p in pages.values() {
        let mut seen = BTreeSet::new();
        let mut at = Some(p.id.as_str());
        while let Some(cur) = at {
            if !seen.insert(cur) {
                return Err(KbError::PageCycle { page: cur.to_string() });
            }
            at = pages.get(cur).and_then(|q| q.parent.as_deref());
        }
    }
    let mut children: BTreeMap<Option<&str>, Vec<&Page>> = BTreeMap::new();
    for p in pages.values() {
        let parent = p.parent.as_deref().filter(|q| pages.contains_key(q));
        children.entry(parent).or_default().push(p);
    }
    for list in children.values_mut() {
        list.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.title.cmp(&b.title)).then_with(|| a.id.cmp(&b.id)));
    }
    fn build(id: Option<&str>, children: &BTreeMap<Option<&str>, Vec<&Page>>) -> Vec<TocNode> {
        children
            .get(&id)
            .map(|list| {
                list.iter()
                    .map(|p| TocNode {
                        page_id: p.id.clone(),
                        title: p.title.clone(),
                        children: build(Some(&p.id), children),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }
    Ok(build(None, &children))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn kb_of(texts: &[&str]) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        for t in texts {
            kb.assert_clause(parse_formula(t).unwrap(), None).unwrap();
        }
        kb
    }

    #[test]
    fn example_rule_registers_seven_symbols() {
        let kb = kb_of(&["either_true(isomorphic(?P,D_8),isomorphic(?P,Q_8)) :- ?P:nonabelian_group[order->8]."]);
        assert_eq!(kb.len(), 1);
        assert_eq!(kb.registry().len(), 7);
    }

    #[test]
    fn duplicates_get_distinct_ids() {
        let mut kb = KnowledgeBase::new();
        let a = kb.assert_clause(parse_formula("p(a).").unwrap(), None).unwrap();
        let b = kb.assert_clause(parse_formula("p(a).").unwrap(), None).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(b.duplicate_of, Some(a.id));
        assert_eq!(a.duplicate_of, None);
    }

    #[test]
    fn range_restriction_and_clash() {
        let mut kb = KnowledgeBase::new();
        let err = kb.assert_clause(parse_formula("p(?X).").unwrap(), None).unwrap_err();
        assert_eq!(err.code(), "E_RANGE_RESTRICTION");
        kb.assert_clause(parse_formula("g[order->8].").unwrap(), None).unwrap();
        let err = kb.assert_clause(parse_formula("order(g,8).").unwrap(), None).unwrap_err();
        assert_eq!(err.code(), "E_NAMESPACE_CLASH");
        assert_eq!(kb.len(), 1);
    }

    #[test]
    fn relevant_facts_example() {
        let kb = kb_of(&[
            "perfect(?E) :- alg_ext(?E,?F), perfect(?F).",
            "alg_ext(e1,f1).",
            "perfect(f1).",
            "q(z).",
        ]);
        let goal: BTreeSet<String> = ["perfect", "alg_ext"].iter().map(|s| s.to_string()).collect();
        // Jaccard: rule 2/2, perfect(f1) 1/3, alg_ext(e1,f1) 1/4
        assert_eq!(kb.relevant_facts(&goal, 20), vec![ClauseId(1), ClauseId(3), ClauseId(2)]);
        assert_eq!(kb.relevant_facts(&goal, 2), vec![ClauseId(1), ClauseId(3)]);
        assert!(KnowledgeBase::new().relevant_facts(&goal, 5).is_empty());
        let other: BTreeSet<String> = ["zzz".to_string()].into();
        assert!(kb.relevant_facts(&other, 5).is_empty());
    }

    #[test]
    fn zero_score_clauses_within_two_hops() {
        let kb = kb_of(&["p(a).", "q(a,b).", "r(b).", "s(c)."]);
        let goal: BTreeSet<String> = ["p".to_string()].into();
        // p-a (1 hop) -> q(a,b) at hop 1, b at hop 2 -> r(b) at hop 2
        assert_eq!(kb.relevant_facts(&goal, 10), vec![ClauseId(1), ClauseId(2), ClauseId(3)]);
    }

    fn page(id: &str, parent: Option<&str>, rank: i64) -> Page {
        Page {
            id: id.into(),
            publication_id: "book".into(),
            parent: parent.map(Into::into),
            rank,
            title: id.into(),
            body: String::new(),
        }
    }

    fn with_book() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.put_publication(Publication {
            id: "book".into(),
            title: "Algebra".into(),
            authors: vec![],
            year: None,
            source_ref: String::new(),
        })
        .unwrap();
        kb
    }

    #[test]
    fn toc_orders_by_rank() {
        let mut kb = with_book();
        kb.put_page(page("A", None, 0)).unwrap();
        kb.put_page(page("B", Some("A"), 1)).unwrap();
        kb.put_page(page("C", Some("A"), 0)).unwrap();
        let t = kb.toc("book").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].page_id, "A");
        let kids: Vec<_> = t[0].children.iter().map(|c| c.page_id.as_str()).collect();
        assert_eq!(kids, vec!["C", "B"]);
    }

    #[test]
    fn cycles_rejected_on_edit_and_detected_by_toc() {
        let mut kb = with_book();
        kb.put_page(page("A", None, 0)).unwrap();
        kb.put_page(page("B", Some("A"), 0)).unwrap();
        let err = kb.put_page(page("A", Some("B"), 0)).unwrap_err();
        assert_eq!(err.code(), "E_PAGE_CYCLE");
        assert!(kb.toc("book").is_ok());
        let err = toc(&[page("A", Some("B"), 0), page("B", Some("A"), 0)]).unwrap_err();
        assert_eq!(err.code(), "E_PAGE_CYCLE");
    }

    #[test]
    fn annotations_stay_on_one_page() {
        let mut kb = with_book();
        let mut p = page("A", None, 0);
        p.body = "Every group of exponent two is abelian.".into();
        kb.put_page(p).unwrap();
        let id = kb
            .annotate_with_clauses("A", 0..38, vec![parse_formula("abelian(?G) :- exponent(?G,2).").unwrap()])
            .unwrap();
        let a = kb.annotation(&id).unwrap();
        assert_eq!(a.clause_ids, vec![ClauseId(1)]);
        assert_eq!(kb.clause(ClauseId(1)).unwrap().provenance.as_deref(), Some(id.as_str()));
        assert!(kb.annotate("A", 0..100, vec![ClauseId(1)]).is_err());
        assert!(kb.annotate("A", 0..3, vec![]).is_err());
    }

    #[test]
    fn commit_chain() {
        let mut kb = kb_of(&["p(a)."]);
        let first = kb.commit("ann", "first", 1000).unwrap().id.clone();
        assert_eq!(kb.commit("ann", "again", 1001).unwrap_err().code(), "E_EMPTY_COMMIT");
        kb.assert_clause(parse_formula("q(a).").unwrap(), None).unwrap();
        let second = kb.commit("bob", "second", 2000).unwrap().clone();
        assert_eq!(kb.history().len(), 2);
        assert_eq!(second.parent.as_deref(), Some(first.as_str()));
        assert!(verify(kb.history()));
    }

    #[test]
    fn retract_recomputes_neighbors() {
        let mut kb = kb_of(&["p(a).", "q(a)."]);
        kb.retract_clause(ClauseId(2)).unwrap();
        assert!(!kb.registry().get("a").unwrap().co_occurrence.contains_key("q"));
        assert!(kb.registry().contains("q"));
    }
}
