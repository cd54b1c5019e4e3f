use std::time::{Duration, Instant};

use rand::Rng;
use semwiki_core::infer::{check_verdict, prove, Goal, Limits, Outcome, Verdict};
use semwiki_core::kb::KnowledgeBase;
use semwiki_core::logic::Clause;
use semwiki_testkit::horn::{constraint_fires, least_model, random_horn, HornShape};
use semwiki_testkit::{rng, terms};

fn generous() -> Limits {
    Limits {
        max_depth: 64,
        step_budget: 5_000_000,
        time_budget: Duration::from_secs(20),
        term_depth: 2,
    }
}

/// Splits the clauses between the store and the goal's hypotheses.
fn setup(r: &mut impl Rng, clauses: &[Clause], conclusion: semwiki_core::logic::Atom) -> (Goal, KnowledgeBase) {
    let mut kb = KnowledgeBase::new();
    let mut hyps = Vec::new();
    for c in clauses {
        if r.gen_bool(0.3) {
            hyps.push(c.clone());
        } else {
            kb.assert_clause(c.clone(), None).unwrap();
        }
    }
    (Goal::new(hyps, vec![conclusion]), kb)
}

fn proof_depth(v: &Verdict) -> Option<usize> {
    match &v.outcome {
        Outcome::Proved { proofs } => Some(proofs.iter().map(|p| p.depth()).max().unwrap_or(0)),
        _ => None,
    }
}

#[test]
fn horn_verdicts_agree_with_least_model() {
    let start = Instant::now();
    for seed in 0..200 {
        let mut r = rng(seed);
        let p = random_horn(&mut r, HornShape::default());
        let model = least_model(&p.clauses);
        let (goal, kb) = setup(&mut r, &p.clauses, p.goal.clone());
        let v = prove(&goal, &kb, &generous());
        assert!(!v.budget_exhausted, "seed {seed}");
        match model.get(&p.goal) {
            Some(&height) => {
                assert_eq!(v.kind(), "proved", "seed {seed}: {} at height {height}", p.goal);
                assert_eq!(proof_depth(&v), Some(height), "seed {seed}: minimal height");
            }
            None => assert_eq!(v.kind(), "unknown", "seed {seed}: {}", p.goal),
        }
        check_verdict(&v, &goal, &kb).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
    assert!(start.elapsed() < Duration::from_secs(30), "{:?}", start.elapsed());
}

#[test]
fn depth_bound_is_respected_exactly() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let p = random_horn(&mut r, HornShape::default());
        let model = least_model(&p.clauses);
        let (goal, kb) = setup(&mut r, &p.clauses, p.goal.clone());
        let max_depth = r.gen_range(1..=5);
        let v = prove(
            &goal,
            &kb,
            &Limits {
                max_depth,
                ..generous()
            },
        );
        let expected = model.get(&p.goal).is_some_and(|&h| h <= max_depth as usize);
        assert_eq!(v.kind() == "proved", expected, "seed {seed}: depth {max_depth}");
        if let Some(d) = proof_depth(&v) {
            assert!(d <= max_depth as usize);
        }
    }
}

#[test]
fn inconsistency_matches_constraint_oracle() {
    let shape = HornShape {
        constraint_rate: 0.3,
        ..HornShape::default()
    };
    let mut fired = 0;
    for seed in 0..200 {
        let mut r = rng(seed);
        let p = random_horn(&mut r, shape);
        let (goal, kb) = setup(&mut r, &p.clauses, p.goal.clone());
        let v = prove(&goal, &kb, &generous());
        let expected = constraint_fires(&p.clauses);
        assert_eq!(v.kind() == "inconsistent", expected, "seed {seed}");
        if expected {
            fired += 1;
        }
        check_verdict(&v, &goal, &kb).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
    assert!(fired > 10, "generator should produce inconsistent programs ({fired})");
}

#[test]
fn verdicts_with_compound_terms_check() {
    let mut conclusive = 0;
    for seed in 0..300 {
        let mut r = rng(seed);
        let mut kb = KnowledgeBase::new();
        for _ in 0..r.gen_range(1..20) {
            let _ = kb.assert_clause(terms::clause(&mut r), None);
        }
        let goal = terms::goal(&mut r);
        let limits = Limits {
            max_depth: 6,
            step_budget: 200_000,
            time_budget: Duration::from_secs(5),
            term_depth: 2,
        };
        let v = prove(&goal, &kb, &limits);
        if v.is_conclusive() {
            conclusive += 1;
        }
        check_verdict(&v, &goal, &kb).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{v:?}"));
        if let Some(d) = proof_depth(&v) {
            assert!(d <= 6);
        }
        // the wire form is lossless
        let back: Verdict = serde_json::from_value(serde_json::to_value(&v).unwrap()).unwrap();
        assert_eq!(back.outcome, v.outcome);
    }
    assert!(conclusive > 0);
}

#[test]
fn more_budget_never_loses_a_proof() {
    for seed in 0..100 {
        let mut r = rng(seed);
        let p = random_horn(&mut r, HornShape::default());
        let (goal, kb) = setup(&mut r, &p.clauses, p.goal.clone());
        let small = Limits {
            step_budget: r.gen_range(5..300),
            ..generous()
        };
        let v1 = prove(&goal, &kb, &small);
        let v2 = prove(
            &goal,
            &kb,
            &Limits {
                step_budget: small.step_budget * 4,
                ..small
            },
        );
        if v1.kind() == "proved" {
            assert_eq!(v2.kind(), "proved", "seed {seed}");
            assert_eq!(proof_depth(&v1), proof_depth(&v2), "seed {seed}");
        }
        if v1.kind() == "unknown" && !v1.budget_exhausted {
            assert_eq!(v2.kind(), "unknown", "seed {seed}");
        }
        let deeper = prove(
            &goal,
            &kb,
            &Limits {
                max_depth: small.max_depth + 1,
                ..generous()
            },
        );
        if prove(&goal, &kb, &generous()).kind() == "proved" {
            assert_eq!(deeper.kind(), "proved", "seed {seed}");
        }
    }
}

#[test]
fn invalid_limits_are_reported() {
    for bad in [
        Limits {
            max_depth: 0,
            ..Limits::default()
        },
        Limits {
            step_budget: 0,
            ..Limits::default()
        },
        Limits {
            time_budget: Duration::ZERO,
            ..Limits::default()
        },
    ] {
        assert_eq!(bad.validate().unwrap_err().code(), "E_INVALID_LIMITS");
    }
    assert!(Limits::default().validate().is_ok());
}
