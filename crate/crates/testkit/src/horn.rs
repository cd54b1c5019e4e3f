//! Random function-free Horn programs and a naive least-model oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use semwiki_core::logic::{Atom, Clause, Head, Term};

#[derive(Debug, Clone)]
pub struct HornProblem {
    pub clauses: Vec<Clause>,
    pub goal: Atom,
}

#[derive(Debug, Clone, Copy)]
pub struct HornShape {
    pub max_clauses: usize,
    pub max_arity: usize,
    pub max_constants: usize,
    pub predicates: usize,
    /// Chance that a generated clause is a constraint.
    pub constraint_rate: f64,
}

impl Default for HornShape {
    fn default() -> Self {
        HornShape {
            max_clauses: 12,
            max_arity: 3,
            max_constants: 6,
            predicates: 4,
            constraint_rate: 0.0,
        }
    }
}

const VARS: [&str; 4] = ["?X", "?Y", "?Z", "?W"];

pub fn random_horn(rng: &mut impl Rng, shape: HornShape) -> HornProblem {
    let nconst = rng.gen_range(1..=shape.max_constants);
    let consts: Vec<String> = (0..nconst).map(|i| format!("k{i}")).collect();
    let preds: Vec<(String, usize)> = (0..shape.predicates)
        .map(|i| (format!("p{i}"), rng.gen_range(1..=shape.max_arity)))
        .collect();
    let n = rng.gen_range(1..=shape.max_clauses);
    let mut clauses = Vec::new();
    for _ in 0..n {
        let (name, arity) = preds.choose(rng).expect("predicates").clone();
        if rng.gen_bool(0.45) {
            let args = (0..arity)
                .map(|_| Term::constant(consts.choose(rng).expect("constants").clone()))
                .collect();
            clauses.push(Clause::fact(Atom::pred(name, args)));
            continue;
        }
        let blen = rng.gen_range(1..=3);
        let mut body = Vec::new();
        let mut bound = BTreeSet::new();
        for _ in 0..blen {
            let (bn, ba) = preds.choose(rng).expect("predicates").clone();
            let args = (0..ba)
                .map(|_| {
                    if rng.gen_bool(0.8) {
                        let v = VARS[rng.gen_range(0..VARS.len())];
                        bound.insert(v);
                        Term::var(v)
                    } else {
                        Term::constant(consts.choose(rng).expect("constants").clone())
                    }
                })
                .collect();
            body.push(Atom::pred(bn, args));
        }
        if rng.gen_bool(shape.constraint_rate) {
            clauses.push(Clause::constraint(body));
            continue;
        }
        let bound: Vec<&str> = bound.into_iter().collect();
        let args = (0..arity)
            .map(|_| {
                if !bound.is_empty() && rng.gen_bool(0.85) {
                    Term::var(*bound.choose(rng).expect("bound"))
                } else {
                    Term::constant(consts.choose(rng).expect("constants").clone())
                }
            })
            .collect();
        clauses.push(Clause::rule(vec![Atom::pred(name, args)], body));
    }
    let model = least_model(&clauses);
    let derived: Vec<&Atom> = model.keys().collect();
    let goal = if !derived.is_empty() && rng.gen_bool(0.5) {
        (*derived.choose(rng).expect("non-empty")).clone()
    } else {
        let (name, arity) = preds.choose(rng).expect("predicates").clone();
        Atom::pred(
            name,
            (0..arity)
                .map(|_| Term::constant(consts.choose(rng).expect("constants").clone()))
                .collect(),
        )
    };
    HornProblem { clauses, goal }
}

type Subst = HashMap<String, Term>;

fn match_atom(pattern: &Atom, ground: &Atom, s: &mut Subst) -> bool {
    if pattern.key() != ground.key() {
        return false;
    }
    for (p, g) in pattern.terms().into_iter().zip(ground.terms()) {
        match p {
            Term::Variable(v) => match s.get(v) {
                Some(b) if b != g => return false,
                Some(_) => {}
                None => {
                    s.insert(v.clone(), g.clone());
                }
            },
            other if other != g => return false,
            _ => {}
        }
    }
    true
}

fn ground(atom: &Atom, s: &Subst) -> Atom {
    atom.map(
        &mut |t| match t {
            Term::Variable(v) => s[v].clone(),
            other => other.clone(),
        },
        &mut |n| n.to_string(),
    )
}

/// Every body instantiation over `model`, by brute-force nested loops.
fn instantiations(body: &[Atom], model: &BTreeMap<Atom, usize>) -> Vec<Subst> {
    let mut out = vec![Subst::new()];
    for b in body {
        let mut next = Vec::new();
        for s in &out {
            for fact in model.keys() {
                let mut s2 = s.clone();
                if match_atom(b, fact, &mut s2) {
                    next.push(s2);
                }
            }
        }
        out = next;
    }
    out
}

/// Least model of a function-free program, ignoring constraints. Each
/// atom maps to its minimal proof height: the naive iteration that first
/// derives it, counting facts as iteration 1.
pub fn least_model(clauses: &[Clause]) -> BTreeMap<Atom, usize> {
    let mut model: BTreeMap<Atom, usize> = BTreeMap::new();
    let mut level = 1;
    loop {
        let mut new = BTreeMap::new();
        for c in clauses {
            let Head::Atoms(heads) = &c.head else { continue };
            for s in instantiations(&c.body, &model) {
                for head in heads {
                    let a = ground(head, &s);
                    if !model.contains_key(&a) {
                        new.entry(a).or_insert(level);
                    }
                }
            }
        }
        if new.is_empty() {
            return model;
        }
        model.extend(new);
        level += 1;
    }
}

/// Whether some constraint body is satisfied in the least model of the
/// non-constraint clauses.
pub fn constraint_fires(clauses: &[Clause]) -> bool {
    let model = least_model(clauses);
    clauses
        .iter()
        .filter(|c| c.head.is_falsum())
        .any(|c| !instantiations(&c.body, &model).is_empty())
}
