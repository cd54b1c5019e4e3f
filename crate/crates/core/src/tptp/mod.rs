//! TPTP first-order-form export with relevance-based axiom selection.

mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infer::Goal;
use crate::kb::KnowledgeBase;
use crate::logic::{Atom, Clause, ClauseId, Head, Term};

pub use validate::{validate_fof, FofFinding};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TptpError {
    #[error("E_INVALID_LIMITS: {0}")]
    InvalidParams(String),
}

impl TptpError {
    pub fn code(&self) -> &'static str {
        match self {
            TptpError::InvalidParams(_) => "E_INVALID_LIMITS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FofRole {
    Axiom,
    Hypothesis,
    Conjecture,
}

impl FofRole {
    pub fn as_str(self) -> &'static str {
        match self {
            FofRole::Axiom => "axiom",
            FofRole::Hypothesis => "hypothesis",
            FofRole::Conjecture => "conjecture",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FofFormula {
    pub name: String,
    pub role: FofRole,
    pub body: String,
}

impl fmt::Display for FofFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fof({}, {}, {}).", self.name, self.role.as_str(), self.body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionParams {
    pub max_axioms: usize,
    pub max_hops: usize,
    pub tolerance: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            max_axioms: 64,
            max_hops: 3,
            tolerance: 1.5,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), TptpError> {
        if self.max_axioms == 0 || self.max_hops == 0 {
            return Err(TptpError::InvalidParams("max_axioms and max_hops must be positive".into()));
        }
        if !(self.tolerance >= 1.0) || !self.tolerance.is_finite() {
            return Err(TptpError::InvalidParams("tolerance must be a finite number >= 1".into()));
        }
        Ok(())
    }
}

/// Injective renaming of identifiers into TPTP lower words. One mangler
/// is used per exported document.
#[derive(Debug, Default, Clone)]
pub struct Mangler {
    names: BTreeMap<String, String>,
    taken: HashMap<String, String>,
}

fn base_name(ident: &str) -> String {
    if !ident.is_empty() && ident.bytes().all(|b| b.is_ascii_digit()) {
        return format!("n{ident}");
    }
    let mut out: String = ident
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    match out.chars().next() {
        None => out = "p_".into(),
        Some(c) if c.is_ascii_digit() || c == '_' => out.insert_str(0, "p_"),
        Some(c) => out.replace_range(..c.len_utf8(), &c.to_ascii_lowercase().to_string()),
    }
    out
}

impl Mangler {
    pub fn new() -> Mangler {
        Mangler::default()
    }

    /// TPTP name for `ident`, stable across calls.
    pub fn mangle(&mut self, ident: &str) -> String {
        if let Some(n) = self.names.get(ident) {
            return n.clone();
        }
        let base = base_name(ident);
        let mut name = base.clone();
        let mut k = 2;
        while self.taken.contains_key(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone(), ident.to_string());
        self.names.insert(ident.to_string(), name.clone());
        name
    }

    /// Identifier to TPTP name, for every identifier mangled so far.
    pub fn mapping(&self) -> &BTreeMap<String, String> {
        &self.names
    }
}

/// Mangles `ident` in a fresh namespace.
pub fn mangle(ident: &str) -> String {
    Mangler::new().mangle(ident)
}

/// Variable names for one formula: uppercase-initial and injective.
struct VarNames {
    names: BTreeMap<String, String>,
    taken: BTreeSet<String>,
}

impl VarNames {
    fn new() -> Self {
        VarNames {
            names: BTreeMap::new(),
            taken: BTreeSet::new(),
        }
    }

    fn name(&mut self, var: &str) -> String {
        if let Some(n) = self.names.get(var) {
            return n.clone();
        }
        let raw = var.trim_start_matches('?');
        let mut base: String = raw
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        match base.chars().next() {
            Some(c) if c.is_ascii_alphabetic() => {
                base.replace_range(..1, &c.to_ascii_uppercase().to_string());
            }
            _ => base.insert(0, 'V'),
        }
        let mut name = base.clone();
        let mut k = 2;
        while self.taken.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        self.names.insert(var.to_string(), name.clone());
        name
    }
}

fn term_fof(t: &Term, m: &mut Mangler, vars: &mut VarNames) -> String {
    match t {
        Term::Variable(v) => vars.name(v),
        Term::Constant(c) => m.mangle(c),
        Term::Compound { functor, args } => {
            let args: Vec<String> = args.iter().map(|a| term_fof(a, m, vars)).collect();
            format!("{}({})", m.mangle(functor), args.join(", "))
        }
    }
}

fn atom_fof(a: &Atom, m: &mut Mangler, vars: &mut VarNames) -> String {
    let (name, _, _) = a.key();
    let name = m.mangle(name);
    let args: Vec<String> = a.terms().into_iter().map(|t| term_fof(t, m, vars)).collect();
    if args.is_empty() {
        name
    } else {
        format!("{name}({})", args.join(", "))
    }
}

fn conj(parts: Vec<String>) -> String {
    if parts.len() == 1 {
        parts.into_iter().next().expect("one part")
    } else {
        format!("({})", parts.join(" & "))
    }
}

/// Universally closed formula body for a clause.
fn clause_body(c: &Clause, m: &mut Mangler) -> String {
    let mut vars = VarNames::new();
    let head = match &c.head {
        Head::Falsum => "$false".to_string(),
        Head::Atoms(atoms) => conj(atoms.iter().map(|a| atom_fof(a, m, &mut vars)).collect()),
    };
    let matrix = if c.body.is_empty() {
        head
    } else {
        let body = conj(c.body.iter().map(|a| atom_fof(a, m, &mut vars)).collect());
        format!("({body} => {head})")
    };
    let bound: Vec<String> = c.variables().iter().map(|v| vars.name(v)).collect();
    if bound.is_empty() {
        matrix
    } else {
        format!("! [{}] : {matrix}", bound.join(", "))
    }
}

fn axiom_name(c: &Clause, m: &mut Mangler) -> String {
    let sym = match c.head.atoms().first() {
        Some(a) => m.mangle(a.key().0),
        None => "false".to_string(),
    };
    format!("ax_{sym}_{}", c.id.map(|i| i.0).unwrap_or(0))
}

/// Axiom formula for a stored clause.
pub fn to_fof_with(c: &Clause, m: &mut Mangler) -> FofFormula {
    FofFormula {
        name: axiom_name(c, m),
        role: FofRole::Axiom,
        body: clause_body(c, m),
    }
}

/// [`to_fof_with`] in a fresh namespace.
pub fn to_fof(c: &Clause) -> FofFormula {
    to_fof_with(c, &mut Mangler::new())
}

/// The goal as one conjecture: hypotheses imply the conclusions.
pub fn goal_fof(goal: &Goal, m: &mut Mangler) -> FofFormula {
    let mut vars = VarNames::new();
    let concl = conj(goal.conclusions.iter().map(|a| atom_fof(a, m, &mut vars)).collect());
    let body = if goal.hypotheses.is_empty() {
        concl
    } else {
        let hyps: Vec<String> = goal
            .hypotheses
            .iter()
            .map(|h| {
                let b = clause_body(h, m);
                if b.starts_with('!') {
                    format!("({b})")
                } else {
                    b
                }
            })
            .collect();
        format!("{} => {concl}", conj(hyps))
    };
    FofFormula {
        name: "goal".into(),
        role: FofRole::Conjecture,
        body,
    }
}

/// Symbol-trigger relevance selection. A symbol triggers a clause when it
/// occurs in it and is at most `tolerance` times as common as the
/// clause's rarest symbol. Starting from the goal symbols, each hop adds
/// the clauses triggered by the symbols collected so far.
pub fn select_axioms(goal_symbols: &BTreeSet<String>, kb: &KnowledgeBase, params: &SelectionParams) -> Vec<ClauseId> {
    select_with_hops(goal_symbols, kb, params)
        .into_iter()
        .map(|(_, id)| id)
        .collect()
}

/// Like [`select_axioms`], returning the hop at which each clause was
/// selected.
pub fn select_with_hops(
    goal_symbols: &BTreeSet<String>,
    kb: &KnowledgeBase,
    params: &SelectionParams,
) -> Vec<(usize, ClauseId)> {
    let clauses: Vec<(ClauseId, BTreeSet<String>)> = kb
        .clauses()
        .filter_map(|c| Some((c.id?, c.symbols())))
        .collect();
    let mut occ: HashMap<&str, usize> = HashMap::new();
    for (_, syms) in &clauses {
        for s in syms {
            *occ.entry(s).or_default() += 1;
        }
    }
    let triggers: Vec<BTreeSet<&str>> = clauses
        .iter()
        .map(|(_, syms)| {
            let min = syms.iter().map(|s| occ[s.as_str()]).min().unwrap_or(0) as f64;
            syms.iter()
                .map(String::as_str)
                .filter(|s| occ[s] as f64 <= params.tolerance * min)
                .collect()
        })
        .collect();
    let mut active: BTreeSet<&str> = goal_symbols.iter().map(String::as_str).collect();
    let mut chosen = vec![false; clauses.len()];
    let mut out = Vec::new();
    for hop in 1..=params.max_hops {
        let new: Vec<usize> = (0..clauses.len())
            .filter(|&i| !chosen[i] && triggers[i].iter().any(|s| active.contains(s)))
            .collect();
        if new.is_empty() {
            break;
        }
        for &i in &new {
            chosen[i] = true;
            out.push((hop, clauses[i].0));
        }
        for &i in &new {
            active.extend(clauses[i].1.iter().map(String::as_str));
        }
    }
    out.sort();
    out.truncate(params.max_axioms);
    out
}

/// A complete problem file: header comments, selected axioms, conjecture.
pub fn export_problem(goal: &Goal, kb: &KnowledgeBase, params: &SelectionParams) -> Result<String, TptpError> {
    params.validate()?;
    let selected = select_axioms(&goal.symbols(), kb, params);
    let mut m = Mangler::new();
    let mut out = String::new();
    out.push_str("% semwiki problem export\n");
    out.push_str(&format!(
        "% axioms: {} selected of {} (max_axioms={}, max_hops={}, tolerance={})\n",
        selected.len(),
        kb.len(),
        params.max_axioms,
        params.max_hops,
        params.tolerance
    ));
    if let Some(rev) = kb.head_revision() {
        out.push_str(&format!("% kb revision: {rev}\n"));
    }
    let mut lines = Vec::new();
    for id in &selected {
        if let Some(c) = kb.clause(*id) {
            lines.push(to_fof_with(c, &mut m).to_string());
        }
    }
    let conjecture = goal_fof(goal, &mut m).to_string();
    for (ident, name) in m.mapping() {
        if ident != name {
            out.push_str(&format!("% {name} = {ident}\n"));
        }
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out.push_str(&conjecture);
    out.push('\n');
    Ok(out)
}

/// Every stored clause as an axiom, with no conjecture.
pub fn export_axioms(kb: &KnowledgeBase) -> String {
    let mut m = Mangler::new();
    let lines: Vec<String> = kb.clauses().map(|c| to_fof_with(c, &mut m).to_string()).collect();
    let mut out = format!("% semwiki knowledge base: {} clauses\n", kb.len());
    if let Some(rev) = kb.head_revision() {
        out.push_str(&format!("% kb revision: {rev}\n"));
    }
    for (ident, name) in m.mapping() {
        if ident != name {
            out.push_str(&format!("% {name} = {ident}\n"));
        }
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_atom, parse_formula, parse_program};

    #[test]
    fn mangling() {
        assert_eq!(mangle("EquivalenceRelation"), "equivalenceRelation");
        assert_eq!(mangle("D_8"), "d_8");
        assert_eq!(mangle("8"), "n8");
        assert_eq!(mangle("2x"), "p_2x");
        assert_eq!(mangle("a-b"), "a_b");
        let mut m = Mangler::new();
        assert_eq!(m.mangle("Order"), "order");
        assert_eq!(m.mangle("order"), "order_2");
        assert_eq!(m.mangle("Order"), "order");
    }

    #[test]
    fn fact_and_rule() {
        let mut c = parse_formula("p(a).").unwrap();
        c.id = Some(ClauseId(1));
        assert_eq!(to_fof(&c).to_string(), "fof(ax_p_1, axiom, p(a)).");
        let mut c = parse_formula("either_true(isomorphic(?P,D_8),isomorphic(?P,Q_8)) :- ?P:nonabelian_group[order->8].")
            .unwrap();
        c.id = Some(ClauseId(4));
        assert_eq!(
            to_fof(&c).to_string(),
            "fof(ax_either_true_4, axiom, ! [P] : ((nonabelian_group(P) & order(P, n8)) => either_true(isomorphic(P, d_8), isomorphic(P, q_8))))."
        );
        let mut c = parse_formula("falsum :- p(?X), q(?X).").unwrap();
        c.id = Some(ClauseId(2));
        assert_eq!(
            to_fof(&c).to_string(),
            "fof(ax_false_2, axiom, ! [X] : ((p(X) & q(X)) => $false))."
        );
    }

    #[test]
    fn exponent_two_conjecture() {
        let goal = Goal::new(
            parse_program("product(?X,?X,identity) :- element(?X).\nproduct(a,b,c).").unwrap(),
            vec![parse_atom("product(b,a,c)").unwrap()],
        );
        assert_eq!(
            goal_fof(&goal, &mut Mangler::new()).to_string(),
            "fof(goal, conjecture, ((! [X] : (element(X) => product(X, X, identity))) & product(a, b, c)) => product(b, a, c))."
        );
    }

    #[test]
    fn empty_kb_export_has_only_the_conjecture() {
        let goal = Goal::new(vec![], vec![parse_atom("p(a)").unwrap()]);
        let doc = export_problem(&goal, &KnowledgeBase::new(), &SelectionParams::default()).unwrap();
        let fofs: Vec<&str> = doc.lines().filter(|l| l.starts_with("fof(")).collect();
        assert_eq!(fofs, ["fof(goal, conjecture, p(a))."]);
        assert!(validate_fof(&doc).is_ok());
    }

    #[test]
    fn selection_by_hops() {
        let mut kb = KnowledgeBase::new();
        for c in parse_program("p(a).\nq(?X) :- p(?X).\nr(b).\ns(?X) :- q(?X).").unwrap() {
            kb.assert_clause(c, None).unwrap();
        }
        let syms: BTreeSet<String> = ["q".to_string()].into();
        // q occurs twice, s once: q is too common to trigger clause 4
        assert_eq!(select_axioms(&syms, &kb, &SelectionParams::default()), vec![ClauseId(2)]);
        let loose = SelectionParams {
            tolerance: 10.0,
            ..Default::default()
        };
        assert_eq!(
            select_with_hops(&syms, &kb, &loose),
            vec![(1, ClauseId(2)), (1, ClauseId(4)), (2, ClauseId(1))]
        );
        let one = SelectionParams {
            max_hops: 1,
            ..loose
        };
        assert_eq!(select_axioms(&syms, &kb, &one), vec![ClauseId(2), ClauseId(4)]);
        assert!(select_axioms(&["zzz".to_string()].into(), &kb, &one).is_empty());
        let bad = SelectionParams {
            max_axioms: 0,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err().code(), "E_INVALID_LIMITS");
    }
}
