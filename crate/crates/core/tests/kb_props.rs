use std::collections::BTreeSet;
use std::fs;

use rand::seq::SliceRandom;
use rand::Rng;
use semwiki_core::kb::{toc, verify, verify_chain, KnowledgeBase, Page, TocNode};
use semwiki_core::logic::ClauseId;
use semwiki_testkit::history::{publication, random_history};
use semwiki_testkit::{pages, rng, terms};

#[test]
fn chain_verifies_after_random_commit_sequences() {
    for seed in 0..100 {
        let mut kb = KnowledgeBase::new();
        let commits = random_history(&mut kb, seed);
        let h = kb.history();
        assert_eq!(h.len(), commits, "seed {seed}");
        assert!(verify(h), "seed {seed}");
        assert_eq!(h[0].parent, None);
        for w in h.windows(2) {
            assert_eq!(w[1].parent.as_deref(), Some(w[0].id.as_str()));
        }
        assert!(kb.pending().is_empty());
    }
}

#[test]
fn save_load_preserves_clauses_and_history() {
    for seed in 0..20 {
        let mut kb = KnowledgeBase::new();
        random_history(&mut kb, seed);
        let dir = tempfile::tempdir().unwrap();
        kb.save(dir.path()).unwrap();
        let back = KnowledgeBase::load(dir.path()).unwrap();
        assert_eq!(back.history(), kb.history(), "seed {seed}");
        let a: Vec<String> = kb.clauses().map(|c| format!("{:?} {c}", c.id)).collect();
        let b: Vec<String> = back.clauses().map(|c| format!("{:?} {c}", c.id)).collect();
        assert_eq!(a, b, "seed {seed}");
        assert_eq!(back.toc("b").unwrap(), kb.toc("b").unwrap());
    }
}

#[test]
fn any_single_byte_change_in_memory_is_detected() {
    for seed in 0..50 {
        let mut kb = KnowledgeBase::new();
        random_history(&mut kb, seed);
        let mut r = rng(1000 + seed);
        let mut h = kb.history().to_vec();
        let i = r.gen_range(0..h.len());
        let field = r.gen_range(0..3);
        let target = match field {
            0 => &mut h[i].changeset,
            1 => &mut h[i].message,
            _ => &mut h[i].author,
        };
        let mut bytes = std::mem::take(target).into_bytes();
        let at = r.gen_range(0..bytes.len());
        // stay within ASCII so the string remains valid UTF-8
        bytes[at] ^= 1 << r.gen_range(0..7);
        *target = String::from_utf8_lossy(&bytes).into_owned();
        assert_eq!(verify_chain(&h), Err(i), "seed {seed}");
    }
}

#[test]
fn any_single_byte_change_on_disk_is_detected() {
    for seed in 0..100 {
        let mut kb = KnowledgeBase::new();
        random_history(&mut kb, seed);
        let dir = tempfile::tempdir().unwrap();
        kb.save(dir.path()).unwrap();
        let mut files: Vec<_> = fs::read_dir(dir.path().join("revlog"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        let mut r = rng(5000 + seed);
        let path = files.choose(&mut r).unwrap();
        let mut bytes = fs::read(path).unwrap();
        let at = r.gen_range(0..bytes.len());
        bytes[at] ^= r.gen_range(1..=255u8);
        fs::write(path, &bytes).unwrap();
        assert!(KnowledgeBase::load(dir.path()).is_err(), "seed {seed}: byte {at} of {}", path.display());
    }
}

fn flatten(nodes: &[TocNode], depth: usize, out: &mut Vec<(usize, String)>) {
    for n in nodes {
        out.push((depth, n.page_id.clone()));
        flatten(&n.children, depth + 1, out);
    }
}

#[test]
fn toc_matches_reference_on_random_forests() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let forest = pages::random_forest(&mut r, "b", 30);
        let mut kb = KnowledgeBase::new();
        kb.put_publication(publication("b")).unwrap();
        kb.put_publication(publication("other")).unwrap();
        for p in &forest {
            kb.put_page(p.clone()).unwrap();
        }
        // pages of another publication do not leak in
        for p in pages::random_forest(&mut r, "other", 5) {
            kb.put_page(p).unwrap();
        }
        let mut got = Vec::new();
        flatten(&kb.toc("b").unwrap(), 0, &mut got);
        assert_eq!(got, pages::expected_toc(&forest), "seed {seed}");
    }
}

#[test]
fn reparenting_under_a_descendant_is_rejected() {
    let mut rejected = 0;
    for seed in 0..200 {
        let mut r = rng(seed);
        let forest = pages::random_forest(&mut r, "b", 20);
        let mut kb = KnowledgeBase::new();
        kb.put_publication(publication("b")).unwrap();
        for p in &forest {
            kb.put_page(p.clone()).unwrap();
        }
        let before = kb.toc("b").unwrap();
        let victim = forest.choose(&mut r).unwrap();
        let below = pages::descendants(&forest, &victim.id);
        let new_parent = below.choose(&mut r).unwrap().clone();
        let moved = Page {
            parent: Some(new_parent),
            ..victim.clone()
        };
        let err = kb.put_page(moved).unwrap_err();
        assert_eq!(err.code(), "E_PAGE_CYCLE", "seed {seed}");
        assert_eq!(kb.toc("b").unwrap(), before);
        rejected += 1;
    }
    assert_eq!(rejected, 200);
}

#[test]
fn toc_detects_cycles_in_raw_page_sets() {
    for seed in 0..100 {
        let mut r = rng(seed);
        let mut forest = pages::random_forest(&mut r, "b", 20);
        let i = r.gen_range(0..forest.len());
        let below = pages::descendants(&forest, &forest[i].id);
        forest[i].parent = Some(below.choose(&mut r).unwrap().clone());
        let err = toc(&forest).unwrap_err();
        assert_eq!(err.code(), "E_PAGE_CYCLE", "seed {seed}");
    }
}

#[test]
fn relevant_facts_are_prefix_monotone_in_k() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let mut kb = KnowledgeBase::new();
        for _ in 0..r.gen_range(0..25) {
            let _ = kb.assert_clause(terms::clause(&mut r), None);
        }
        let goal = terms::goal(&mut r).symbols();
        let full = kb.relevant_facts(&goal, 100);
        let ids: BTreeSet<ClauseId> = full.iter().copied().collect();
        assert_eq!(ids.len(), full.len(), "no repeats");
        for k in 0..=full.len() + 2 {
            let part = kb.relevant_facts(&goal, k);
            assert_eq!(part[..], full[..k.min(full.len())], "seed {seed} k {k}");
        }
        // every clause sharing a symbol with the goal is listed
        for c in kb.clauses() {
            if c.symbols().intersection(&goal).next().is_some() {
                assert!(ids.contains(&c.id.unwrap()), "seed {seed}");
            }
        }
    }
}

#[test]
fn stored_symbols_are_registered_after_retractions() {
    for seed in 0..50 {
        let mut kb = KnowledgeBase::new();
        random_history(&mut kb, seed);
        for c in kb.clauses() {
            for s in c.symbols() {
                assert!(kb.registry().contains(&s), "seed {seed}: {s}");
            }
        }
    }
}
