//! Random T2Math-like documents.

use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "be", "a", "group", "the", "identity", "of", "for", "all", "is", "commutative", "element", "Let", "Suppose", "that",
    "Prove", "ring", "x", "and",
];
const MATH: &[&str] = &["G", "x*x=e", "a,b", "x\\in G", "\\sim", "f(x, y)", "1", "\\$5", "S_1,S_2,S_3"];
const PUNCT: &[&str] = &[",", ".", ";", ":", "!", "?", "\n", "  "];

/// Arbitrary text built from words, math spans and punctuation. Most
/// outputs tokenize; some have an unterminated span.
pub fn random_text(rng: &mut impl Rng, max_pieces: usize) -> String {
    let n = rng.gen_range(0..=max_pieces);
    let mut out = String::new();
    for _ in 0..n {
        match rng.gen_range(0..10) {
            0..=3 => out.push_str(WORDS.choose(rng).expect("words")),
            4..=5 => {
                out.push('$');
                out.push_str(MATH.choose(rng).expect("math"));
                out.push('$');
            }
            6 => out.push_str(PUNCT.choose(rng).expect("punct")),
            7 if rng.gen_bool(0.1) => out.push('$'),
            7 => out.push(rng.gen_range('a'..='z')),
            8 => out.push_str(["é", "∀", "→", "\t"].choose(rng).expect("unicode")),
            _ => {}
        }
        if rng.gen_bool(0.7) {
            out.push(' ');
        }
    }
    out
}

/// A well-formed proposition with known sentence counts. Math spans in
/// declarations may contain commas.
#[derive(Debug, Clone)]
pub struct Document {
    pub text: String,
    pub declarations: usize,
    pub premises: usize,
    pub conclusions: usize,
}

fn sentence(rng: &mut impl Rng) -> String {
    let mut parts = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        if rng.gen_bool(0.4) {
            parts.push(format!("${}$", MATH.choose(rng).expect("math")));
        } else {
            let w = *WORDS.choose(rng).expect("words");
            // keywords inside a sentence would start a new section
            let w = if matches!(w, "Let" | "Suppose" | "Prove") { "then" } else { w };
            parts.push(w.to_string());
        }
    }
    if !parts.iter().any(|p| p.starts_with('$')) {
        parts.insert(0, format!("${}$", MATH.choose(rng).expect("math")));
    }
    parts.join(" ")
}

pub fn random_document(rng: &mut impl Rng) -> Document {
    let declarations = rng.gen_range(0..=3);
    let premises = rng.gen_range(0..=3);
    let conclusions = rng.gen_range(1..=2);
    let mut text = String::new();
    if declarations > 0 {
        let items: Vec<String> = (0..declarations).map(|_| sentence(rng)).collect();
        text.push_str("Let ");
        text.push_str(&items.join(",\n    "));
        text.push_str(".\n");
    }
    if premises > 0 {
        let items: Vec<String> = (0..premises).map(|_| sentence(rng)).collect();
        text.push_str("Suppose that ");
        text.push_str(&items.join(";\n    "));
        text.push_str(".\n");
    }
    let items: Vec<String> = (0..conclusions).map(|_| sentence(rng)).collect();
    text.push_str("Prove that ");
    text.push_str(&items.join("; "));
    text.push('.');
    Document {
        text,
        declarations,
        premises,
        conclusions,
    }
}
