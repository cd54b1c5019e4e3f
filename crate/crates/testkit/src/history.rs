//! Random edit histories for a knowledge base.

use rand::seq::SliceRandom;
use rand::Rng;
use semwiki_core::kb::{KnowledgeBase, Page, Publication};
use semwiki_core::logic::ClauseId;

use crate::{rng, terms};

pub fn publication(id: &str) -> Publication {
    Publication {
        id: id.into(),
        title: format!("Book {id}"),
        authors: vec![],
        year: None,
        source_ref: String::new(),
    }
}

/// Applies a random mix of edits and commits. Returns the number of
/// commits made.
pub fn random_history(kb: &mut KnowledgeBase, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut commits = 0;
    kb.put_publication(publication("b")).unwrap();
    let mut page_ids: Vec<String> = Vec::new();
    for step in 0..r.gen_range(5..40) {
        match r.gen_range(0..10) {
            0..=4 => {
                // namespace clashes are expected with a random signature
                let _ = kb.assert_clause(terms::clause(&mut r), None);
            }
            5 => {
                let ids: Vec<ClauseId> = kb.clauses().filter_map(|c| c.id).collect();
                if let Some(id) = ids.choose(&mut r) {
                    kb.retract_clause(*id).unwrap();
                }
            }
            6 => {
                let id = format!("p{step}");
                let parent = page_ids.choose(&mut r).cloned().filter(|_| r.gen_bool(0.6));
                kb.put_page(Page {
                    id: id.clone(),
                    publication_id: "b".into(),
                    parent,
                    rank: r.gen_range(0..3),
                    title: format!("T{step}"),
                    body: "some page text".into(),
                })
                .unwrap();
                page_ids.push(id);
            }
            7 => {
                let syms: Vec<String> = kb.registry().iter().map(|(n, _)| n.clone()).collect();
                if let Some(s) = syms.choose(&mut r) {
                    kb.set_doc(s, &format!("doc {step}")).unwrap();
                }
            }
            _ => {
                if kb.commit("tester", &format!("step {step}"), step as i64).is_ok() {
                    commits += 1;
                }
            }
        }
    }
    if kb.commit("tester", "final", 1_000).is_ok() {
        commits += 1;
    }
    commits
}
