//! Single shared namespace for predicates, classes, attributes, constants
//! and functors, with co-occurrence counts for the editor query tools.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Atom, Clause, LogicError, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Predicate,
    Class,
    Attribute,
    Constant,
    Functor,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Predicate => "predicate",
            SymbolKind::Class => "class",
            SymbolKind::Attribute => "attribute",
            SymbolKind::Constant => "constant",
            SymbolKind::Functor => "functor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub kind: SymbolKind,
    pub arity: usize,
    #[serde(default)]
    pub doc: String,
    /// Symbols asserted in the same clause, with the number of clauses
    /// they shared.
    #[serde(default)]
    pub co_occurrence: BTreeMap<String, usize>,
}

/// One occurrence of a symbol in a clause.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymbolUse {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolHit {
    pub identifier: String,
    pub kind: SymbolKind,
    pub arity: usize,
    pub neighbors: Vec<String>,
}

const NEIGHBOR_LIMIT: usize = 5;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRegistry {
    entries: BTreeMap<String, SymbolEntry>,
}

impl SymbolRegistry {
    pub fn get(&self, name: &str) -> Option<&SymbolEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SymbolEntry)> {
        self.entries.iter()
    }

    /// Checks that `name` may be used as `kind`/`arity` without changing
    /// anything.
    pub fn check(&self, name: &str, kind: SymbolKind, arity: usize) -> Result<(), LogicError> {
        if name.is_empty() {
            return Err(LogicError::Syntax {
                offset: 0,
                message: "empty identifier".into(),
            });
        }
        match self.entries.get(name) {
            Some(e) if e.kind != kind || e.arity != arity => Err(LogicError::NamespaceClash {
                name: name.to_string(),
                existing: format!("{}/{}", e.kind, e.arity),
                requested: format!("{kind}/{arity}"),
            }),
            _ => Ok(()),
        }
    }

    /// Registers a symbol. Re-registering the same kind and arity is a
    /// no-op.
    pub fn register(&mut self, name: &str, kind: SymbolKind, arity: usize) -> Result<(), LogicError> {
        self.check(name, kind, arity)?;
        self.entries.entry(name.to_string()).or_insert_with(|| SymbolEntry {
            kind,
            arity,
            doc: String::new(),
            co_occurrence: BTreeMap::new(),
        });
        Ok(())
    }

    pub fn set_doc(&mut self, name: &str, doc: impl Into<String>) -> bool {
        match self.entries.get_mut(name) {
            Some(e) => {
                e.doc = doc.into();
                true
            }
            None => false,
        }
    }

    /// Registers every symbol of `clause` and records pairwise
    /// co-occurrence. Nothing changes if any symbol clashes.
    pub fn register_clause(&mut self, clause: &Clause) -> Result<(), LogicError> {
        let uses = symbol_uses(clause);
        for u in &uses {
            self.check(&u.name, u.kind, u.arity)?;
        }
        // a symbol used twice in one clause with different kinds
        let mut seen: BTreeMap<&str, (SymbolKind, usize)> = BTreeMap::new();
        for u in &uses {
            if let Some(&(kind, arity)) = seen.get(u.name.as_str()) {
                if kind != u.kind || arity != u.arity {
                    return Err(LogicError::NamespaceClash {
                        name: u.name.clone(),
                        existing: format!("{kind}/{arity}"),
                        requested: format!("{}/{}", u.kind, u.arity),
                    });
                }
            }
            seen.insert(&u.name, (u.kind, u.arity));
        }
        for u in &uses {
            self.register(&u.name, u.kind, u.arity)?;
        }
        let names: BTreeSet<&str> = seen.keys().copied().collect();
        for a in &names {
            let entry = self.entries.get_mut(*a).expect("registered above");
            for b in &names {
                if a != b {
                    *entry.co_occurrence.entry(b.to_string()).or_insert(0) += 1;
                }
            }
        }
        Ok(())
    }

    /// Neighbors of `name` by descending co-occurrence count.
    pub fn neighbors(&self, name: &str, limit: usize) -> Vec<String> {
        let Some(e) = self.entries.get(name) else {
            return Vec::new();
        };
        let mut ns: Vec<(&String, &usize)> = e.co_occurrence.iter().collect();
        ns.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        ns.into_iter().take(limit).map(|(n, _)| n.clone()).collect()
    }

    /// Case-insensitive search over identifiers and docs, exact matches
    /// first, then prefixes, then substrings, then doc-only matches.
    pub fn search(&self, query: &str, limit: usize) -> Vec<SymbolHit> {
        let q = query.to_lowercase();
        let mut hits: Vec<(u8, &String, &SymbolEntry)> = self
            .entries
            .iter()
            .filter_map(|(name, e)| {
                let lname = name.to_lowercase();
                let rank = if lname == q {
                    0
                } else if lname.starts_with(&q) {
                    1
                } else if lname.contains(&q) {
                    2
                } else if e.doc.to_lowercase().contains(&q) {
                    3
                } else {
                    return None;
                };
                Some((rank, name, e))
            })
            .collect();
        hits.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        hits.into_iter()
            .take(limit)
            .map(|(_, name, e)| SymbolHit {
                identifier: name.clone(),
                kind: e.kind,
                arity: e.arity,
                neighbors: self.neighbors(name, NEIGHBOR_LIMIT),
            })
            .collect()
    }
}

/// Symbol occurrences of a clause, deduplicated, in sorted order.
pub fn symbol_uses(clause: &Clause) -> Vec<SymbolUse> {
    let mut out = BTreeSet::new();
    for atom in clause.head.atoms().iter().chain(clause.body.iter()) {
        match atom {
            Atom::Predicate { name, args } => {
                out.insert(SymbolUse {
                    name: name.clone(),
                    kind: SymbolKind::Predicate,
                    arity: args.len(),
                });
            }
            Atom::Membership { class, .. } => {
                out.insert(SymbolUse {
                    name: class.clone(),
                    kind: SymbolKind::Class,
                    arity: 1,
                });
            }
            Atom::Frame { attribute, .. } => {
                out.insert(SymbolUse {
                    name: attribute.clone(),
                    kind: SymbolKind::Attribute,
                    arity: 2,
                });
            }
        }
        for t in atom.terms() {
            term_uses(t, &mut out);
        }
    }
    out.into_iter().collect()
}

fn term_uses(term: &Term, out: &mut BTreeSet<SymbolUse>) {
    match term {
        Term::Variable(_) => {}
        Term::Constant(name) => {
            out.insert(SymbolUse {
                name: name.clone(),
                kind: SymbolKind::Constant,
                arity: 0,
            });
        }
        Term::Compound { functor, args } => {
            out.insert(SymbolUse {
                name: functor.clone(),
                kind: SymbolKind::Functor,
                arity: args.len(),
            });
            args.iter().for_each(|a| term_uses(a, out));
        }
    }
}
