//! Random page forests and a reference table-of-contents builder.

use rand::Rng;
use semwiki_core::kb::Page;

/// Pages of publication `pub_id` forming a forest. Parents always precede
/// children, so the pages can be inserted in order.
pub fn random_forest(rng: &mut impl Rng, pub_id: &str, max_pages: usize) -> Vec<Page> {
    let n = rng.gen_range(1..=max_pages);
    (0..n)
        .map(|i| Page {
            id: format!("{pub_id}-p{i}"),
            publication_id: pub_id.to_string(),
            parent: (i > 0 && rng.gen_bool(0.7)).then(|| format!("{pub_id}-p{}", rng.gen_range(0..i))),
            rank: rng.gen_range(0..4),
            title: format!("Section {}", rng.gen_range(0..5)),
            body: String::new(),
        })
        .collect()
}

/// Depth-first listing `(depth, page id)` of the expected table of
/// contents: roots first, siblings by rank, then title, then id.
pub fn expected_toc(pages: &[Page]) -> Vec<(usize, String)> {
    fn visit(pages: &[Page], parent: Option<&str>, depth: usize, out: &mut Vec<(usize, String)>) {
        let mut kids: Vec<&Page> = pages.iter().filter(|p| p.parent.as_deref() == parent).collect();
        kids.sort_by_key(|p| (p.rank, p.title.clone(), p.id.clone()));
        for k in kids {
            out.push((depth, k.id.clone()));
            visit(pages, Some(&k.id), depth + 1, out);
        }
    }
    let mut out = Vec::new();
    visit(pages, None, 0, &mut out);
    out
}

/// Ids of `id` and all pages below it.
pub fn descendants(pages: &[Page], id: &str) -> Vec<String> {
    let mut out = vec![id.to_string()];
    let mut i = 0;
    while i < out.len() {
        let cur = out[i].clone();
        out.extend(pages.iter().filter(|p| p.parent.as_deref() == Some(&cur)).map(|p| p.id.clone()));
        i += 1;
    }
    out
}
