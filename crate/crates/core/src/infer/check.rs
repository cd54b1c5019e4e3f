//! Independent proof checking by one-way matching.

use std::collections::HashMap;

use thiserror::Error;

use super::{Goal, Justification, NodeAtom, Outcome, ProofTree, Verdict};
use crate::kb::KnowledgeBase;
use crate::logic::{Atom, Clause, Head, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("E_BAD_PROOF: {reason} at `{node}`")]
pub struct ProofError {
    pub node: String,
    pub reason: String,
}

impl ProofError {
    pub fn code(&self) -> &'static str {
        "E_BAD_PROOF"
    }

    fn at(node: &ProofTree, reason: impl Into<String>) -> ProofError {
        ProofError {
            node: node.atom.to_string(),
            reason: reason.into(),
        }
    }
}

type Subst = HashMap<String, Term>;

/// Matches clause term `p` against proof term `g`. Variables in `g` are
/// rigid.
fn match_term(p: &Term, g: &Term, s: &mut Subst) -> bool {
    match p {
        Term::Variable(v) => match s.get(v) {
            Some(b) => b == g,
            None => {
                s.insert(v.clone(), g.clone());
                true
            }
        },
        Term::Constant(_) => p == g,
        Term::Compound { functor, args } => match g {
            Term::Compound { functor: f, args: a } if f == functor && a.len() == args.len() => {
                args.iter().zip(a).all(|(x, y)| match_term(x, y, s))
            }
            _ => false,
        },
    }
}

fn match_atom(p: &Atom, g: &Atom, s: &mut Subst) -> bool {
    p.key() == g.key() && p.terms().into_iter().zip(g.terms()).all(|(x, y)| match_term(x, y, s))
}

fn node_atom(t: &ProofTree) -> Option<&Atom> {
    match &t.atom {
        NodeAtom::Atom(a) => Some(a),
        NodeAtom::Falsum => None,
    }
}

/// A substitution under which the clause justifies one inference step
/// from the node's children to the node.
fn step_subst(clause: &Clause, node: &ProofTree) -> Option<Subst> {
    if clause.body.len() != node.children.len() {
        return None;
    }
    let heads: Vec<Option<&Atom>> = match (&clause.head, &node.atom) {
        (Head::Falsum, NodeAtom::Falsum) => vec![None],
        (Head::Atoms(atoms), NodeAtom::Atom(_)) => atoms.iter().map(Some).collect(),
        _ => return None,
    };
    for head in heads {
        let mut s = Subst::new();
        if let (Some(h), Some(a)) = (head, node_atom(node)) {
            if !match_atom(h, a, &mut s) {
                continue;
            }
        }
        let body_ok = clause.body.iter().zip(&node.children).all(|(b, c)| match node_atom(c) {
            Some(a) => match_atom(b, a, &mut s),
            None => false,
        });
        if body_ok {
            return Some(s);
        }
    }
    None
}

/// Checks every node of `tree`. `lookup` resolves justifications to
/// clauses.
pub fn check_proof<'a>(tree: &ProofTree, lookup: &dyn Fn(Justification) -> Option<&'a Clause>) -> Result<(), ProofError> {
    let clause = lookup(tree.justification)
        .ok_or_else(|| ProofError::at(tree, format!("unknown justification {}", tree.justification)))?;
    if step_subst(clause, tree).is_none() {
        return Err(ProofError::at(
            tree,
            format!("clause {} does not license this step", tree.justification),
        ));
    }
    tree.children.iter().try_for_each(|c| check_proof(c, lookup))
}

/// Checks a verdict against the goal and knowledge base it claims to
/// answer. Unknown verdicts carry no proof and always pass.
pub fn check_verdict(verdict: &Verdict, goal: &Goal, kb: &KnowledgeBase) -> Result<(), ProofError> {
    let lookup = |j: Justification| match j {
        Justification::Hypothesis(i) => goal.hypotheses.get(i),
        Justification::Clause(id) => kb.clause(id),
    };
    match &verdict.outcome {
        Outcome::Proved { proofs } => {
            if proofs.len() != goal.conclusions.len() {
                return Err(ProofError {
                    node: String::new(),
                    reason: format!("{} proofs for {} conclusions", proofs.len(), goal.conclusions.len()),
                });
            }
            for (tree, concl) in proofs.iter().zip(&goal.conclusions) {
                if node_atom(tree) != Some(concl) {
                    return Err(ProofError::at(tree, format!("root does not prove `{concl}`")));
                }
                check_proof(tree, &lookup)?;
            }
            Ok(())
        }
        Outcome::Inconsistent { witness } => {
            if witness.atom != NodeAtom::Falsum {
                return Err(ProofError::at(witness, "witness root is not falsum"));
            }
            check_proof(witness, &lookup)
        }
        Outcome::Unknown { .. } => Ok(()),
    }
}

/// Every head atom of `clause` instantiated for the step at `node`, or
/// `None` when the step does not match or leaves a head variable unbound.
pub(crate) fn instantiate_head(clause: &Clause, node: &ProofTree) -> Option<Vec<Atom>> {
    let s = step_subst(clause, node)?;
    let mut unbound = false;
    let atoms = clause
        .head
        .atoms()
        .iter()
        .map(|a| {
            a.map(
                &mut |t| {
                    t.map_leaves(&mut |leaf| match leaf {
                        Term::Variable(v) => s.get(v).cloned().unwrap_or_else(|| {
                            unbound = true;
                            leaf.clone()
                        }),
                        other => other.clone(),
                    })
                },
                &mut |n| n.to_string(),
            )
        })
        .collect();
    (!unbound).then_some(atoms)
}
