//! Random clauses over a fixed signature, including compound terms and
//! frame atoms.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use semwiki_core::infer::Goal;
use semwiki_core::logic::{Atom, Clause, Term};

const PREDS: &[(&str, usize)] = &[("p", 1), ("q", 2), ("either_true", 2), ("isomorphic", 2), ("r3", 3)];
const CLASSES: &[&str] = &["Group", "EquivalenceRelation", "nonabelian_group", "Order"];
const ATTRS: &[&str] = &["order", "base_set", "identity"];
const FUNCTORS: &[(&str, usize)] = &[("f", 1), ("g", 2), ("inv", 1)];
const CONSTS: &[&str] = &["a", "b", "D_8", "Q_8", "8", "e1", "c_G", "x0"];
const VARS: &[&str] = &["?X", "?Y", "?P", "?x", "?G"];

fn term(rng: &mut impl Rng, vars: &[&str], depth: u32) -> Term {
    match rng.gen_range(0..10) {
        0..=3 if !vars.is_empty() => Term::var(*vars.choose(rng).expect("vars")),
        4 | 5 if depth > 0 => {
            let (f, n) = *FUNCTORS.choose(rng).expect("functors");
            Term::compound(f, (0..n).map(|_| term(rng, vars, depth - 1)).collect())
        }
        _ => Term::constant(*CONSTS.choose(rng).expect("consts")),
    }
}

pub fn atom(rng: &mut impl Rng, vars: &[&str]) -> Atom {
    match rng.gen_range(0..5) {
        0 => Atom::member(term(rng, vars, 1), *CLASSES.choose(rng).expect("classes")),
        1 => Atom::frame(
            term(rng, vars, 1),
            *ATTRS.choose(rng).expect("attrs"),
            term(rng, vars, 1),
        ),
        _ => {
            let (p, n) = *PREDS.choose(rng).expect("preds");
            Atom::pred(p, (0..n).map(|_| term(rng, vars, 2)).collect())
        }
    }
}

/// A range-restricted clause: fact, rule, multi-head rule or constraint.
pub fn clause(rng: &mut impl Rng) -> Clause {
    match rng.gen_range(0..6) {
        0 | 1 => Clause::fact(atom(rng, &[])),
        2 => {
            let body = (0..rng.gen_range(1..=3)).map(|_| atom(rng, VARS)).collect();
            Clause::constraint(body)
        }
        _ => {
            let body: Vec<Atom> = (0..rng.gen_range(1..=3)).map(|_| atom(rng, VARS)).collect();
            let mut bound = BTreeSet::new();
            for b in &body {
                b.collect_variables(&mut bound);
            }
            let bound: Vec<&str> = bound.iter().map(String::as_str).collect();
            let heads = (0..rng.gen_range(1..=2)).map(|_| atom(rng, &bound)).collect();
            Clause::rule(heads, body)
        }
    }
}

/// A goal with a few hypotheses and one or two ground conclusions.
pub fn goal(rng: &mut impl Rng) -> Goal {
    let hyps = (0..rng.gen_range(0..=3)).map(|_| clause(rng)).collect();
    let concl = (0..rng.gen_range(1..=2)).map(|_| atom(rng, &[])).collect();
    Goal::new(hyps, concl)
}
