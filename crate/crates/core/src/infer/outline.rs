//! Numbered, reverse-bridge rendering of proofs.

use std::fmt::Write;

use super::{instantiated_head, Goal, Justification, NodeAtom, Outcome, ProofTree, Verdict};
use crate::bridge::{apply_reverse_with, RuleSet};
use crate::kb::KnowledgeBase;
use crate::logic::{print_formula, Clause, FALSUM};

/// Renders one proof in post-order, children before their parent and the
/// root last. Each line is `"<n>. <text>  [<citation>]"`, indented two
/// spaces per level below the root.
pub fn render_outline(tree: &ProofTree, rules: &RuleSet, goal: &Goal, kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let mut n = 0;
    walk(tree, 0, rules, goal, kb, &mut n, &mut out);
    out
}

fn walk(tree: &ProofTree, depth: usize, rules: &RuleSet, goal: &Goal, kb: &KnowledgeBase, n: &mut usize, out: &mut String) {
    for c in &tree.children {
        walk(c, depth + 1, rules, goal, kb, n, out);
    }
    *n += 1;
    let _ = writeln!(
        out,
        "{}{}. {}  [{}]",
        "  ".repeat(depth),
        n,
        step_text(tree, rules, goal, kb),
        citation(tree.justification, kb)
    );
}

fn step_text(tree: &ProofTree, rules: &RuleSet, goal: &Goal, kb: &KnowledgeBase) -> String {
    let NodeAtom::Atom(atom) = &tree.atom else {
        return format!("{FALSUM}.");
    };
    let source = match tree.justification {
        Justification::Hypothesis(i) => goal.hypotheses.get(i),
        Justification::Clause(id) => kb.clause(id),
    };
    let heads = source.map(|c| instantiated_head(c, tree)).unwrap_or_else(|| vec![atom.clone()]);
    let fact = Clause::rule(heads, Vec::new());
    let mut text = apply_reverse_with(rules, &fact, &|t| goal.raw_for(t));
    if text == print_formula(&fact) {
        // no reverse rule: show the atom proved at this step
        text = print_formula(&Clause::fact(atom.clone()));
    }
    if !text.ends_with('.') {
        text.push('.');
    }
    text
}

fn citation(j: Justification, kb: &KnowledgeBase) -> String {
    match j {
        Justification::Hypothesis(_) => "hypothesis".to_string(),
        Justification::Clause(id) => match kb.annotations().find(|a| a.clause_ids.contains(&id)) {
            Some(a) => format!("{id}, annotation {}", a.id),
            None => id.to_string(),
        },
    }
}

/// Outline text for a verdict: the proof of each conclusion, the witness
/// of an inconsistency, or the list of relevant facts.
pub fn render_verdict(verdict: &Verdict, rules: &RuleSet, goal: &Goal, kb: &KnowledgeBase) -> String {
    match &verdict.outcome {
        Outcome::Proved { proofs } => {
            let mut out = String::new();
            for (i, p) in proofs.iter().enumerate() {
                if proofs.len() > 1 {
                    let _ = writeln!(out, "Conclusion {}:", i + 1);
                }
                out.push_str(&render_outline(p, rules, goal, kb));
            }
            out
        }
        Outcome::Inconsistent { witness } => {
            format!(
                "The hypotheses are inconsistent with the known facts:\n{}",
                render_outline(witness, rules, goal, kb)
            )
        }
        Outcome::Unknown { relevant } => {
            let mut out = String::from("Not proved. Relevant facts:\n");
            if relevant.is_empty() {
                out.push_str("  (none)\n");
            }
            for id in relevant {
                if let Some(c) = kb.clause(*id) {
                    let _ = writeln!(out, "  {id}: {}", print_formula(c));
                }
            }
            if verdict.budget_exhausted {
                out.push_str("(search budget exhausted)\n");
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{ReverseRecord, RuleRecord, RuleSection};
    use crate::infer::{prove, Limits};
    use crate::logic::{parse_atom, parse_formula, parse_program, ClauseId};

    #[test]
    fn single_node() {
        let goal = Goal::new(vec![parse_formula("p(a).").unwrap()], vec![parse_atom("p(a)").unwrap()]);
        let v = prove(&goal, &KnowledgeBase::new(), &Limits::default());
        let Outcome::Proved { proofs } = &v.outcome else { panic!() };
        let text = render_outline(&proofs[0], &RuleSet::new(), &goal, &KnowledgeBase::new());
        assert_eq!(text, "1. p(a).  [hypothesis]\n");
    }

    #[test]
    fn perfect_field_outline() {
        let mut kb = KnowledgeBase::new();
        for c in parse_program("perfect(?E) :- alg_ext(?E,?F), perfect(?F).\nalg_ext(e1,f1).\nperfect(f1).").unwrap() {
            kb.assert_clause(c, None).unwrap();
        }
        kb.put_publication(crate::kb::Publication {
            id: "pub".into(),
            title: "Fields".into(),
            authors: vec![],
            year: None,
            source_ref: String::new(),
        })
        .unwrap();
        kb.put_page(crate::kb::Page {
            id: "p1".into(),
            publication_id: "pub".into(),
            parent: None,
            rank: 0,
            title: "Perfect fields".into(),
            body: "Pick an element.".into(),
        })
        .unwrap();
        kb.annotate("p1", 0..4, vec![ClauseId(1)]).unwrap();
        let goal = Goal::new(vec![], vec![parse_atom("perfect(e1)").unwrap()]);
        let v = prove(&goal, &kb, &Limits::default());
        let text = render_verdict(&v, &RuleSet::new(), &goal, &kb);
        assert_eq!(
            text,
            "  1. alg_ext(e1,f1).  [c2]\n  2. perfect(f1).  [c3]\n3. perfect(e1).  [c1, annotation a1]\n"
        );
    }

    #[test]
    fn reverse_rule_text() {
        let rules = RuleSet::from_records(vec![RuleRecord {
            id: "eqrel".into(),
            section: RuleSection::Any,
            pattern: r"\d+ is an equivalence relation on \d+".into(),
            span_subpatterns: Default::default(),
            template: "#{1}:EquivalenceRelation[base_set->#{2}].".into(),
            examples: vec![r"$\sim$ is an equivalence relation on $S$".into()],
            reverse: Some(ReverseRecord {
                clause_pattern: "?1:EquivalenceRelation[base_set->?2].".into(),
                sentence_template: "$#{1}$ is an equivalence relation on $#{2}$".into(),
            }),
        }])
        .unwrap();
        let mut goal = Goal::new(
            vec![parse_formula("c_sim:EquivalenceRelation[base_set->c_S].").unwrap()],
            vec![parse_atom("c_sim:EquivalenceRelation").unwrap()],
        );
        goal.constants.insert("c_sim".into(), "var_sim".into());
        goal.constants.insert("c_S".into(), "var_S".into());
        goal.span_map.entries.push(crate::bridge::SpanEntry {
            key: 0,
            raw: r"\sim".into(),
            var: "var_sim".into(),
            range: 0..0,
        });
        goal.span_map.entries.push(crate::bridge::SpanEntry {
            key: 1,
            raw: "S".into(),
            var: "var_S".into(),
            range: 0..0,
        });
        let v = prove(&goal, &KnowledgeBase::new(), &Limits::default());
        let text = render_verdict(&v, &rules, &goal, &KnowledgeBase::new());
        assert_eq!(text, "1. $\\sim$ is an equivalence relation on $S$.  [hypothesis]\n");
    }

    #[test]
    fn unknown_lists_facts() {
        let mut kb = KnowledgeBase::new();
        kb.assert_clause(parse_formula("perfect(f1).").unwrap(), None).unwrap();
        let goal = Goal::new(vec![], vec![parse_atom("perfect(e1)").unwrap()]);
        let v = prove(&goal, &kb, &Limits::default());
        assert_eq!(
            render_verdict(&v, &RuleSet::new(), &goal, &kb),
            "Not proved. Relevant facts:\n  c1: perfect(f1).\n"
        );
    }
}
