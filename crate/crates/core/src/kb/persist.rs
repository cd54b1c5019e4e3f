//! On-disk layout of a store directory and the JSON exchange bundle.
//!
//! ```text
//! clauses.kbt        one clause per line, each preceded by `#@ c<id> [provenance=<id>]`
//! symbols.json       symbol docs
//! pages.json         publications.json  annotations.json  rules.json
//! revlog/<id>.json   one file per revision
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{verify_chain, AnnotationRecord, KbError, KnowledgeBase, Page, Publication, Revision};
use crate::bridge::{RuleRecord, RuleSet};
use crate::logic::{parse_formula, print_formula, Clause, ClauseId, LogicError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleClause {
    pub id: ClauseId,
    pub clause: Clause,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// Everything in a store except its history, as one JSON document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    #[serde(default)]
    pub clauses: Vec<BundleClause>,
    #[serde(default)]
    pub docs: BTreeMap<String, String>,
    #[serde(default)]
    pub publications: Vec<Publication>,
    #[serde(default)]
    pub pages: Vec<Page>,
    #[serde(default)]
    pub annotations: Vec<AnnotationRecord>,
    #[serde(default)]
    pub rules: Vec<RuleRecord>,
}

fn read_json<T: for<'de> Deserialize<'de> + Default>(path: &Path) -> Result<T, KbError> {
    if !path.exists() {
        return Ok(T::default());
    }
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| KbError::Corrupt(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), KbError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| KbError::Invalid(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Parses the `clauses.kbt` format.
pub(crate) fn parse_kbt(text: &str) -> Result<Vec<BundleClause>, KbError> {
    let mut out = Vec::new();
    let mut header: Option<(ClauseId, Option<String>)> = None;
    let mut next = 1u64;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("#@") {
            let mut parts = rest.split_whitespace();
            let id = parts
                .next()
                .and_then(|p| p.strip_prefix('c'))
                .and_then(|n| n.parse::<u64>().ok())
                .ok_or_else(|| KbError::Corrupt(format!("clauses.kbt line {}: bad header", lineno + 1)))?;
            let provenance = parts.find_map(|p| p.strip_prefix("provenance=").map(str::to_string));
            header = Some((ClauseId(id), provenance));
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let clause = parse_formula(line).map_err(|e| match e {
            LogicError::Syntax { offset, message } => {
                KbError::Corrupt(format!("clauses.kbt line {} col {}: {message}", lineno + 1, offset + 1))
            }
            other => KbError::Logic(other),
        })?;
        let (id, provenance) = header.take().unwrap_or((ClauseId(next), None));
        next = next.max(id.0 + 1);
        out.push(BundleClause { id, clause, provenance });
    }
    Ok(out)
}

pub(crate) fn print_kbt<'a>(clauses: impl Iterator<Item = &'a Clause>) -> String {
    let mut out = String::new();
    for c in clauses {
        if let Some(id) = c.id {
            out.push_str(&format!("#@ {id}"));
            if let Some(p) = &c.provenance {
                out.push_str(&format!(" provenance={p}"));
            }
            out.push('\n');
        }
        out.push_str(&print_formula(c));
        out.push('\n');
    }
    out
}

/// Orders revisions by parent links. Fails unless they form one chain.
fn order_chain(mut revs: Vec<Revision>) -> Result<Vec<Revision>, KbError> {
    let mut by_parent: BTreeMap<Option<String>, Revision> = BTreeMap::new();
    for r in revs.drain(..) {
        let key = r.parent.clone();
        if by_parent.insert(key, r).is_some() {
            return Err(KbError::Corrupt("revision log branches".into()));
        }
    }
    let mut out = Vec::new();
    let mut parent: Option<String> = None;
    while let Some(r) = by_parent.remove(&parent) {
        parent = Some(r.id.clone());
        out.push(r);
    }
    if !by_parent.is_empty() {
        return Err(KbError::Corrupt("revision log has unreachable entries".into()));
    }
    Ok(out)
}

impl KnowledgeBase {
    /// Loads a store directory. A missing directory yields an empty store.
    pub fn load(dir: &Path) -> Result<KnowledgeBase, KbError> {
        let mut kb = KnowledgeBase::new();
        if !dir.exists() {
            return Ok(kb);
        }
        let kbt = dir.join("clauses.kbt");
        if kbt.exists() {
            for bc in parse_kbt(&fs::read_to_string(&kbt)?)? {
                kb.insert_clause(bc.id, bc.clause, bc.provenance)?;
            }
        }
        let docs: BTreeMap<String, String> = read_json(&dir.join("symbols.json"))?;
        for (name, doc) in docs {
            kb.registry.set_doc(&name, doc);
        }
        let publications: Vec<Publication> = read_json(&dir.join("publications.json"))?;
        for p in publications {
            kb.publications.insert(p.id.clone(), p);
        }
        let pages: Vec<Page> = read_json(&dir.join("pages.json"))?;
        for p in pages {
            kb.put_page_unchecked(p);
        }
        let annotations: Vec<AnnotationRecord> = read_json(&dir.join("annotations.json"))?;
        for a in annotations {
            kb.put_annotation_unchecked(a);
        }
        let rules_path = dir.join("rules.json");
        if rules_path.exists() {
            kb.set_rules(RuleSet::from_json(&fs::read_to_string(&rules_path)?)?);
        }
        let revdir = dir.join("revlog");
        let mut revs = Vec::new();
        if revdir.exists() {
            for entry in fs::read_dir(&revdir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let text = fs::read_to_string(&path)?;
                let rev: Revision = serde_json::from_str(&text)
                    .map_err(|e| KbError::Corrupt(format!("{}: {e}", path.display())))?;
                if path.file_stem().and_then(|s| s.to_str()) != Some(rev.id.as_str()) {
                    return Err(KbError::Corrupt(format!("{} does not match its id", path.display())));
                }
                revs.push(rev);
            }
        }
        let history = order_chain(revs)?;
        if let Err(i) = verify_chain(&history) {
            return Err(KbError::Corrupt(format!("revision {} fails verification", history[i].id)));
        }
        kb.set_history(history);
        kb.clear_pending();
        Ok(kb)
    }

    /// Writes the store to `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<(), KbError> {
        fs::create_dir_all(dir.join("revlog"))?;
        fs::write(dir.join("clauses.kbt"), print_kbt(self.clauses.values()))?;
        let docs: BTreeMap<&String, &String> = self
            .registry
            .iter()
            .filter(|(_, e)| !e.doc.is_empty())
            .map(|(n, e)| (n, &e.doc))
            .collect();
        write_json(&dir.join("symbols.json"), &docs)?;
        write_json(&dir.join("publications.json"), &self.publications.values().collect::<Vec<_>>())?;
        write_json(&dir.join("pages.json"), &self.pages.values().collect::<Vec<_>>())?;
        write_json(&dir.join("annotations.json"), &self.annotations.values().collect::<Vec<_>>())?;
        fs::write(dir.join("rules.json"), self.rules.to_json() + "\n")?;
        for r in &self.history {
            let path = dir.join("revlog").join(format!("{}.json", r.id));
            if !path.exists() {
                write_json(&path, r)?;
            }
        }
        Ok(())
    }

    pub fn export_bundle(&self) -> Bundle {
        Bundle {
            clauses: self
                .clauses
                .iter()
                .map(|(id, c)| BundleClause {
                    id: *id,
                    clause: Clause {
                        id: None,
                        provenance: None,
                        ..c.clone()
                    },
                    provenance: c.provenance.clone(),
                })
                .collect(),
            docs: self
                .registry
                .iter()
                .filter(|(_, e)| !e.doc.is_empty())
                .map(|(n, e)| (n.clone(), e.doc.clone()))
                .collect(),
            publications: self.publications.values().cloned().collect(),
            pages: self.pages.values().cloned().collect(),
            annotations: self.annotations.values().cloned().collect(),
            rules: self.rules.records(),
        }
    }

    /// Merges a bundle into the store. Clauses receive fresh ids and
    /// annotations are renumbered. All or nothing: on error the store is
    /// unchanged. Returns the old-to-new clause id mapping.
    pub fn import_bundle(&mut self, bundle: Bundle) -> Result<BTreeMap<ClauseId, ClauseId>, KbError> {
        let mut staged = self.clone();
        let mut ann_ids: BTreeMap<String, String> = BTreeMap::new();
        let mut next_ann = staged.next_annotation;
        for a in &bundle.annotations {
            ann_ids.insert(a.id.clone(), format!("a{next_ann}"));
            next_ann += 1;
        }
        let mut ids = BTreeMap::new();
        for bc in bundle.clauses {
            let prov = bc.provenance.map(|p| ann_ids.get(&p).cloned().unwrap_or(p));
            let report = staged.assert_clause(bc.clause, prov)?;
            ids.insert(bc.id, report.id);
        }
        for (name, doc) in &bundle.docs {
            if staged.registry.contains(name) {
                staged.set_doc(name, doc)?;
            }
        }
        for p in bundle.publications {
            staged.put_publication(p)?;
        }
        // parents before children
        let mut pages = bundle.pages;
        while !pages.is_empty() {
            let before = pages.len();
            let mut rest = Vec::new();
            for p in pages {
                let ready = p.parent.as_ref().is_none_or(|q| staged.pages.contains_key(q));
                if ready {
                    staged.put_page(p)?;
                } else {
                    rest.push(p);
                }
            }
            if rest.len() == before {
                return Err(KbError::PageCycle {
                    page: rest[0].id.clone(),
                });
            }
            pages = rest;
        }
        for mut a in bundle.annotations {
            a.clause_ids = a
                .clause_ids
                .iter()
                .map(|id| ids.get(id).copied().unwrap_or(*id))
                .collect();
            staged.check_annotation(&a)?;
            let fresh = ann_ids[&a.id].clone();
            a.id = fresh;
            staged.put_annotation_unchecked(a.clone());
            staged.pending.push(super::Change::PutAnnotation { annotation: a });
        }
        for r in bundle.rules {
            match staged.rules.get(&r.id) {
                Some(existing) if existing.record == r => {}
                _ => staged.add_rule(r)?,
            }
        }
        *self = staged;
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kbt_round_trip() {
        let text = "#@ c3 provenance=a1\np(a).\n# note\nq(?X) :- p(?X).\n";
        let cs = parse_kbt(text).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].id, ClauseId(3));
        assert_eq!(cs[0].provenance.as_deref(), Some("a1"));
        assert_eq!(cs[1].id, ClauseId(4));
    }

    #[test]
    fn kbt_reports_line() {
        let err = parse_kbt("p(a).\np(.\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut kb = KnowledgeBase::new();
        kb.assert_clause(parse_formula("perfect(f1).").unwrap(), Some("a9".into())).unwrap();
        kb.assert_clause(parse_formula("alg_ext(e1,f1).").unwrap(), None).unwrap();
        kb.set_doc("perfect", "perfect field").unwrap();
        kb.put_publication(Publication {
            id: "b".into(),
            title: "Fields".into(),
            authors: vec!["E. Artin".into()],
            year: Some(1944),
            source_ref: String::new(),
        })
        .unwrap();
        kb.put_page(Page {
            id: "p1".into(),
            publication_id: "b".into(),
            parent: None,
            rank: 0,
            title: "Intro".into(),
            body: "text".into(),
        })
        .unwrap();
        kb.commit("ann", "init", 5).unwrap();
        kb.save(dir.path()).unwrap();
        let back = KnowledgeBase::load(dir.path()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.clause(ClauseId(1)).unwrap().provenance.as_deref(), Some("a9"));
        assert_eq!(back.registry().get("perfect").unwrap().doc, "perfect field");
        assert_eq!(back.history(), kb.history());
        assert_eq!(back.toc("b").unwrap().len(), 1);
        assert!(back.pending().is_empty());
    }

    #[test]
    fn corrupted_revision_detected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut kb = KnowledgeBase::new();
        kb.assert_clause(parse_formula("p(a).").unwrap(), None).unwrap();
        let id = kb.commit("ann", "init", 5).unwrap().id.clone();
        kb.save(dir.path()).unwrap();
        let path = dir.path().join("revlog").join(format!("{id}.json"));
        let text = fs::read_to_string(&path).unwrap().replace("p(a)", "p(b)");
        fs::write(&path, text).unwrap();
        assert_eq!(KnowledgeBase::load(dir.path()).unwrap_err().code(), "E_CORRUPT");
    }

    #[test]
    fn bundle_import_renumbers() {
        let mut src = KnowledgeBase::new();
        src.assert_clause(parse_formula("p(a).").unwrap(), None).unwrap();
        let bundle = src.export_bundle();
        let mut dst = KnowledgeBase::new();
        dst.assert_clause(parse_formula("q(b).").unwrap(), None).unwrap();
        let map = dst.import_bundle(bundle).unwrap();
        assert_eq!(map[&ClauseId(1)], ClauseId(2));
        assert_eq!(dst.len(), 2);
        let bad = Bundle {
            clauses: vec![BundleClause {
                id: ClauseId(1),
                clause: parse_formula("q(b,c).").unwrap(),
                provenance: None,
            }],
            ..Default::default()
        };
        assert!(dst.import_bundle(bad).is_err());
        assert_eq!(dst.len(), 2);
    }
}
