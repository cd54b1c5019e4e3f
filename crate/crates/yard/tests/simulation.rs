mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use semwiki_core::infer::{check_verdict, prove, Limits, Outcome, Verdict};
use semwiki_testkit::yard_sim::{goal_of, simulate, Coverage, Scenario};

/// The fixture problems with their real verdicts. A proof of the
/// exponent-2 problem is the invalid answer for the others; for the
/// exponent-2 problem itself that proof tree is passed off as an
/// inconsistency witness.
fn scenario() -> Scenario {
    let kb = fixture_kb();
    let proof = prove(&goal_of(&kb, EXPONENT2), &kb, &Limits::default());
    let Outcome::Proved { proofs } = &proof.outcome else { panic!("fixture must be provable") };
    let mut correct = HashMap::new();
    let mut bad = HashMap::new();
    for s in [EXPONENT2, GROUP, AMBIGUOUS] {
        let goal = goal_of(&kb, s);
        let v = prove(&goal, &kb, &Limits::default());
        let wrong = if s == EXPONENT2 {
            Verdict {
                outcome: Outcome::Inconsistent {
                    witness: proofs[0].clone(),
                },
                ..proof.clone()
            }
        } else {
            proof.clone()
        };
        check_verdict(&v, &goal, &kb).unwrap();
        assert!(check_verdict(&wrong, &goal, &kb).is_err());
        correct.insert(s.to_string(), v);
        bad.insert(s.to_string(), wrong);
    }
    Scenario {
        kb,
        sources: [EXPONENT2, GROUP, AMBIGUOUS].map(String::from).to_vec(),
        correct,
        bad,
    }
}

#[test]
fn thousand_interleavings_keep_the_invariants() {
    let start = Instant::now();
    let scenario = scenario();
    let mut c = Coverage::default();
    for seed in 0..1000 {
        c += simulate(seed, &scenario);
    }
    for (path, n) in [
        ("accepted", c.accepted),
        ("supplementary", c.supplementary),
        ("rejected", c.rejected),
        ("ignored", c.ignored),
        ("requeued", c.requeued),
        ("stale", c.stale),
        ("timed out", c.timed_out),
    ] {
        assert!(n > 0, "path `{path}` never exercised: {c:?}");
    }
    assert!(start.elapsed() < Duration::from_secs(60), "{:?}", start.elapsed());
}
