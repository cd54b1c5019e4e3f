//! Frame-logic clause model.
//!
//! A [`Clause`] is a Horn-style rule over three atom shapes: ordinary
//! predicates `p(t1, ..., tn)`, class membership `t:C` and attribute frames
//! `t[a->v]`. Molecules such as `t:C[a->v, b->w]` are flattened into one
//! membership atom followed by one frame atom per attribute. The reserved
//! head `falsum` marks integrity constraints.

mod registry;
mod syntax;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use registry::{SymbolEntry, SymbolHit, SymbolKind, SymbolRegistry, SymbolUse};
pub use syntax::{parse_atom, parse_formula, parse_formula_in, parse_program, print_formula};

/// Reserved head of integrity constraints.
pub const FALSUM: &str = "falsum";

/// Prefix that turns an identifier into a logic variable.
pub const VAR_PREFIX: &str = "var_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("E_SYNTAX at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("E_ARITY_CLASH: predicate `{name}` used with arity {found}, known arity {expected}")]
    ArityClash {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("E_NAMESPACE_CLASH: `{name}` is registered as {existing} and cannot become {requested}")]
    NamespaceClash {
        name: String,
        existing: String,
        requested: String,
    },
}

impl LogicError {
    pub fn code(&self) -> &'static str {
        match self {
            LogicError::Syntax { .. } => "E_SYNTAX",
            LogicError::ArityClash { .. } => "E_ARITY_CLASH",
            LogicError::NamespaceClash { .. } => "E_NAMESPACE_CLASH",
        }
    }
}

/// Returns true when `name` denotes a logic variable (`?X` or `var_x`).
pub fn is_variable_name(name: &str) -> bool {
    name.starts_with('?') || name.starts_with(VAR_PREFIX)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(String),
    Compound { functor: String, args: Vec<Term> },
}

impl Term {
    /// Builds a variable or constant from a bare identifier, following the
    /// `?`/`var_` naming rule.
    pub fn from_ident(name: impl Into<String>) -> Term {
        let name = name.into();
        if is_variable_name(&name) {
            Term::Variable(name)
        } else {
            Term::Constant(name)
        }
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Compound {
            functor: functor.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Constant(_) => true,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Nesting depth: constants and variables are 0, `f(a)` is 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Variable(_) | Term::Constant(_) => 0,
            Term::Compound { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Variable(v) => {
                out.insert(v.clone());
            }
            Term::Constant(_) => {}
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    /// Rewrites every leaf with `f`, rebuilding compounds.
    pub fn map_leaves(&self, f: &mut impl FnMut(&Term) -> Term) -> Term {
        match self {
            Term::Compound { functor, args } => Term::Compound {
                functor: functor.clone(),
                args: args.iter().map(|a| a.map_leaves(f)).collect(),
            },
            leaf => f(leaf),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(name) | Term::Constant(name) => f.write_str(name),
            Term::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Predicate { name: String, args: Vec<Term> },
    Membership { instance: Term, class: String },
    Frame {
        instance: Term,
        attribute: String,
        value: Term,
    },
}

impl Atom {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom::Predicate {
            name: name.into(),
            args,
        }
    }

    pub fn member(instance: Term, class: impl Into<String>) -> Atom {
        Atom::Membership {
            instance,
            class: class.into(),
        }
    }

    pub fn frame(instance: Term, attribute: impl Into<String>, value: Term) -> Atom {
        Atom::Frame {
            instance,
            attribute: attribute.into(),
            value,
        }
    }

    /// Symbol used to index the atom: predicate name, class or attribute.
    pub fn key(&self) -> (&str, usize, u8) {
        match self {
            Atom::Predicate { name, args } => (name, args.len(), 0),
            Atom::Membership { class, .. } => (class, 1, 1),
            Atom::Frame { attribute, .. } => (attribute, 2, 2),
        }
    }

    /// Argument terms in positional order.
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Predicate { args, .. } => args.iter().collect(),
            Atom::Membership { instance, .. } => vec![instance],
            Atom::Frame {
                instance, value, ..
            } => vec![instance, value],
        }
    }

    pub fn is_ground(&self) -> bool {
        self.terms().into_iter().all(Term::is_ground)
    }

    pub fn depth(&self) -> usize {
        self.terms().into_iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        for t in self.terms() {
            t.collect_variables(out);
        }
    }

    /// Applies `term_fn` to every argument term and `ident_fn` to the
    /// predicate name, class or attribute.
    pub fn map(
        &self,
        term_fn: &mut impl FnMut(&Term) -> Term,
        ident_fn: &mut impl FnMut(&str) -> String,
    ) -> Atom {
        match self {
            Atom::Predicate { name, args } => Atom::Predicate {
                name: ident_fn(name),
                args: args.iter().map(|a| term_fn(a)).collect(),
            },
            Atom::Membership { instance, class } => Atom::Membership {
                instance: term_fn(instance),
                class: ident_fn(class),
            },
            Atom::Frame {
                instance,
                attribute,
                value,
            } => Atom::Frame {
                instance: term_fn(instance),
                attribute: ident_fn(attribute),
                value: term_fn(value),
            },
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_atoms(std::slice::from_ref(self)))
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_atom(&text).map_err(serde::de::Error::custom)
    }
}

/// Head of a clause: a non-empty conjunction of atoms, or `falsum`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Falsum,
    Atoms(Vec<Atom>),
}

impl Head {
    pub fn atoms(&self) -> &[Atom] {
        match self {
            Head::Falsum => &[],
            Head::Atoms(atoms) => atoms,
        }
    }

    pub fn is_falsum(&self) -> bool {
        matches!(self, Head::Falsum)
    }
}

/// Stable identifier assigned by the knowledge base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClauseId(pub u64);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Head,
    pub body: Vec<Atom>,
    pub id: Option<ClauseId>,
    /// Annotation record the clause was stated in, if any.
    pub provenance: Option<String>,
}

impl Clause {
    pub fn fact(atom: Atom) -> Clause {
        Clause::rule(vec![atom], Vec::new())
    }

    pub fn rule(head: Vec<Atom>, body: Vec<Atom>) -> Clause {
        Clause {
            head: Head::Atoms(head),
            body,
            id: None,
            provenance: None,
        }
    }

    pub fn constraint(body: Vec<Atom>) -> Clause {
        Clause {
            head: Head::Falsum,
            body,
            id: None,
            provenance: None,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_falsum()
    }

    pub fn is_ground(&self) -> bool {
        self.head.atoms().iter().all(Atom::is_ground) && self.body.iter().all(Atom::is_ground)
    }

    pub fn head_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.head
            .atoms()
            .iter()
            .for_each(|a| a.collect_variables(&mut out));
        out
    }

    pub fn body_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.body.iter().for_each(|a| a.collect_variables(&mut out));
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = self.head_variables();
        out.extend(self.body_variables());
        out
    }

    /// Range restriction: head variables must occur in the body. Ground
    /// facts pass trivially. Constraint facts are never well formed.
    pub fn is_range_restricted(&self) -> bool {
        if self.is_constraint() {
            return !self.body.is_empty();
        }
        let body = self.body_variables();
        self.head_variables().iter().all(|v| body.contains(v))
    }

    /// Same head and body, ignoring id and provenance.
    pub fn same_formula(&self, other: &Clause) -> bool {
        self.head == other.head && self.body == other.body
    }

    /// Applies `term_fn` to every argument and `ident_fn` to every
    /// predicate, class and attribute name.
    pub fn map(
        &self,
        term_fn: &mut impl FnMut(&Term) -> Term,
        ident_fn: &mut impl FnMut(&str) -> String,
    ) -> Clause {
        let head = match &self.head {
            Head::Falsum => Head::Falsum,
            Head::Atoms(atoms) => Head::Atoms(atoms.iter().map(|a| a.map(term_fn, ident_fn)).collect()),
        };
        Clause {
            head,
            body: self.body.iter().map(|a| a.map(term_fn, ident_fn)).collect(),
            id: self.id,
            provenance: self.provenance.clone(),
        }
    }

    /// Every non-variable symbol: predicates, classes, attributes,
    /// constants and functors. The reserved head is not a symbol.
    pub fn symbols(&self) -> BTreeSet<String> {
        registry::symbol_uses(self).into_iter().map(|u| u.name).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl Serialize for Clause {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&print_formula(self))
    }
}

impl<'de> Deserialize<'de> for Clause {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

/// All symbols of a clause, see [`Clause::symbols`].
pub fn symbols_of(clause: &Clause) -> BTreeSet<String> {
    clause.symbols()
}
