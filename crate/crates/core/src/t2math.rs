//! T2Math propositions.
//!
//! A proposition has up to three sections, always in this order:
//!
//! ```text
//! Let $G$ be a group,
//!     $e$ be the identity of $G$.
//! Suppose that
//!     $x*x=e$ for all $x\in G$.
//! Prove that
//!     $G$ is commutative.
//! ```
//!
//! Only `Prove that` is mandatory. Section keywords are case-sensitive and
//! recognized at the start of a line or after a top-level `.`/`;`.
//! Declarations are separated by top-level commas (or `.`/`;`), premises and
//! conclusions by `.` or `;`. Math spans are delimited by `$`; `\$` inside a
//! span is a literal dollar.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum T2MathError {
    #[error("E_UNTERMINATED_MATH: `$` at byte {offset} has no closing `$`")]
    UnterminatedMath { offset: usize },
    #[error("E_NO_CONCLUSION: proposition has no `Prove that` section")]
    NoConclusion,
    #[error("E_SECTION_ORDER: `{keyword}` at byte {offset} appears after `{previous}`")]
    SectionOrder {
        offset: usize,
        keyword: String,
        previous: String,
    },
    #[error("E_EXPECTED_SECTION: text at byte {offset} precedes the first section keyword")]
    ExpectedSection { offset: usize },
}

impl T2MathError {
    pub fn code(&self) -> &'static str {
        match self {
            T2MathError::UnterminatedMath { .. } => "E_UNTERMINATED_MATH",
            T2MathError::NoConclusion => "E_NO_CONCLUSION",
            T2MathError::SectionOrder { .. } => "E_SECTION_ORDER",
            T2MathError::ExpectedSection { .. } => "E_EXPECTED_SECTION",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Declaration,
    Premise,
    Conclusion,
}

impl Section {
    pub fn keyword(self) -> &'static str {
        match self {
            Section::Declaration => "Let",
            Section::Premise => "Suppose that",
            Section::Conclusion => "Prove that",
        }
    }

    fn separators(self) -> &'static [char] {
        match self {
            Section::Declaration => &[',', '.', ';'],
            Section::Premise | Section::Conclusion => &['.', ';'],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Keyword,
    Math,
    Text,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedSpan {
    pub byte_range: Range<usize>,
    pub kind: SpanKind,
}

/// A `$...$` region. `byte_range` covers the delimiters, `raw` does not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathSpan {
    pub raw: String,
    pub byte_range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Sentence text without section keyword or separator.
    pub text: String,
    /// Location of `text` in the source document.
    pub byte_range: Range<usize>,
    /// Math spans, with ranges into the source document.
    pub spans: Vec<MathSpan>,
    pub section: Section,
}

impl Sentence {
    /// Span ranges relative to `text`.
    pub fn local_spans(&self) -> impl Iterator<Item = (Range<usize>, &MathSpan)> + '_ {
        let base = self.byte_range.start;
        self.spans
            .iter()
            .map(move |s| (s.byte_range.start - base..s.byte_range.end - base, s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub declarations: Vec<Sentence>,
    pub premises: Vec<Sentence>,
    pub conclusions: Vec<Sentence>,
    pub source: String,
}

impl Proposition {
    /// All sentences in document order.
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.declarations
            .iter()
            .chain(self.premises.iter())
            .chain(self.conclusions.iter())
    }

    /// Re-renders the proposition with canonical keywords and separators.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        if !self.declarations.is_empty() {
            out.push_str("Let ");
            out.push_str(&join_texts(&self.declarations, ", "));
            out.push_str(".\n");
        }
        if !self.premises.is_empty() {
            out.push_str("Suppose that ");
            out.push_str(&join_texts(&self.premises, "; "));
            out.push_str(".\n");
        }
        out.push_str("Prove that ");
        out.push_str(&join_texts(&self.conclusions, "; "));
        out.push_str(".\n");
        out
    }

    /// Section, text and span contents of every sentence, without source
    /// offsets. Two propositions with equal shape say the same thing.
    pub fn shape(&self) -> Vec<(Section, String, Vec<String>)> {
        self.sentences()
            .map(|s| {
                (
                    s.section,
                    s.text.clone(),
                    s.spans.iter().map(|m| m.raw.clone()).collect(),
                )
            })
            .collect()
    }
}

fn join_texts(sentences: &[Sentence], sep: &str) -> String {
    sentences
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(sep)
}

const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?'];

/// Keyword at `pos`, if any, with its byte length.
fn keyword_at(src: &str, pos: usize) -> Option<(Section, usize)> {
    let rest = &src[pos..];
    let boundary = |len: usize| {
        rest[len..]
            .chars()
            .next()
            .is_none_or(|c| c.is_whitespace() || c == '$')
    };
    if rest.starts_with("Let") && boundary(3) {
        return Some((Section::Declaration, 3));
    }
    for (word, section) in [("Suppose", Section::Premise), ("Prove", Section::Conclusion)] {
        if let Some(after) = rest.strip_prefix(word) {
            let gap = after.len() - after.trim_start().len();
            if gap > 0 && after[gap..].starts_with("that") {
                let len = word.len() + gap + 4;
                if boundary(len) {
                    return Some((section, len));
                }
            }
        }
    }
    None
}

/// End of the math span opened at `open` (index just past the closing `$`).
fn close_math(src: &str, open: usize) -> Result<usize, T2MathError> {
    let bytes = src.as_bytes();
    let mut i = open + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1) == Some(&b'$') => i += 2,
            b'$' => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(T2MathError::UnterminatedMath { offset: open })
}

/// Classifies every byte of `source` as keyword, math, text or punctuation.
pub fn tokenize(source: &str) -> Result<Vec<ClassifiedSpan>, T2MathError> {
    let mut spans: Vec<ClassifiedSpan> = Vec::new();
    let push = |spans: &mut Vec<ClassifiedSpan>, range: Range<usize>, kind: SpanKind| {
        if let Some(last) = spans.last_mut() {
            if kind == SpanKind::Text && last.kind == SpanKind::Text && last.byte_range.end == range.start {
                last.byte_range.end = range.end;
                return;
            }
        }
        spans.push(ClassifiedSpan {
            byte_range: range,
            kind,
        });
    };
    let mut keyword_ok = true;
    let mut i = 0;
    while i < source.len() {
        let c = source[i..].chars().next().expect("in bounds");
        if keyword_ok && !c.is_whitespace() {
            if let Some((_, len)) = keyword_at(source, i) {
                push(&mut spans, i..i + len, SpanKind::Keyword);
                i += len;
                keyword_ok = false;
                continue;
            }
        }
        match c {
            '$' => {
                let end = close_math(source, i)?;
                push(&mut spans, i..end, SpanKind::Math);
                i = end;
                keyword_ok = false;
            }
            '\\' if source[i + 1..].starts_with('$') => {
                push(&mut spans, i..i + 2, SpanKind::Text);
                i += 2;
                keyword_ok = false;
            }
            c if PUNCTUATION.contains(&c) => {
                push(&mut spans, i..i + 1, SpanKind::Punctuation);
                i += 1;
                keyword_ok = c == '.' || c == ';';
            }
            c => {
                let len = c.len_utf8();
                push(&mut spans, i..i + len, SpanKind::Text);
                i += len;
                if c == '\n' {
                    keyword_ok = true;
                } else if !c.is_whitespace() {
                    keyword_ok = false;
                }
            }
        }
    }
    Ok(spans)
}

/// Parses a whole proposition document.
pub fn parse(source: &str) -> Result<Proposition, T2MathError> {
    let tokens = tokenize(source)?;
    let mut sections: Vec<(Section, usize, usize)> = Vec::new(); // (section, token index, keyword start)
    for (idx, tok) in tokens.iter().enumerate() {
        if tok.kind != SpanKind::Keyword {
            continue;
        }
        let (section, _) = keyword_at(source, tok.byte_range.start).expect("tokenized as keyword");
        if let Some(&(prev, _, _)) = sections.last() {
            if section <= prev {
                return Err(T2MathError::SectionOrder {
                    offset: tok.byte_range.start,
                    keyword: section.keyword().to_string(),
                    previous: prev.keyword().to_string(),
                });
            }
        } else {
            let lead = &source[..tok.byte_range.start];
            if let Some(pos) = lead.find(|c: char| !c.is_whitespace()) {
                return Err(T2MathError::ExpectedSection { offset: pos });
            }
        }
        sections.push((section, idx, tok.byte_range.start));
    }
    if sections.is_empty() {
        return Err(T2MathError::NoConclusion);
    }
    let mut prop = Proposition {
        declarations: Vec::new(),
        premises: Vec::new(),
        conclusions: Vec::new(),
        source: source.to_string(),
    };
    for (n, &(section, idx, _)) in sections.iter().enumerate() {
        let end_idx = sections.get(n + 1).map(|s| s.1).unwrap_or(tokens.len());
        let body = &tokens[idx + 1..end_idx];
        let sentences = split_sentences(source, body, section);
        match section {
            Section::Declaration => prop.declarations = sentences,
            Section::Premise => prop.premises = sentences,
            Section::Conclusion => prop.conclusions = sentences,
        }
    }
    if prop.conclusions.is_empty() {
        return Err(T2MathError::NoConclusion);
    }
    Ok(prop)
}

fn split_sentences(source: &str, body: &[ClassifiedSpan], section: Section) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut start = match body.first() {
        Some(t) => t.byte_range.start,
        None => return out,
    };
    let mut spans = Vec::new();
    let flush = |start: usize, end: usize, spans: &mut Vec<MathSpan>, out: &mut Vec<Sentence>| {
        let piece = &source[start..end];
        let lead = piece.len() - piece.trim_start().len();
        let text = piece.trim();
        if !text.is_empty() {
            let s = start + lead;
            out.push(Sentence {
                text: text.to_string(),
                byte_range: s..s + text.len(),
                spans: std::mem::take(spans),
                section,
            });
        }
        spans.clear();
    };
    for tok in body {
        match tok.kind {
            SpanKind::Punctuation
                if source[tok.byte_range.clone()]
                    .chars()
                    .all(|c| section.separators().contains(&c)) =>
            {
                flush(start, tok.byte_range.start, &mut spans, &mut out);
                start = tok.byte_range.end;
            }
            SpanKind::Math => spans.push(MathSpan {
                raw: source[tok.byte_range.start + 1..tok.byte_range.end - 1].to_string(),
                byte_range: tok.byte_range.clone(),
            }),
            _ => {}
        }
    }
    let end = body.last().map(|t| t.byte_range.end).unwrap_or(start);
    flush(start, end.max(start), &mut spans, &mut out);
    out
}

/// Parses one standalone sentence, such as a bridge rule example. A leading
/// section keyword selects the section; otherwise `default` is used. The
/// trailing separator, if any, is dropped.
pub fn parse_sentence(text: &str, default: Section) -> Result<Sentence, T2MathError> {
    let tokens = tokenize(text)?;
    let (section, body) = match tokens.first() {
        Some(t) if t.kind == SpanKind::Keyword => {
            let (section, _) = keyword_at(text, t.byte_range.start).expect("keyword");
            (section, &tokens[1..])
        }
        _ => (default, &tokens[..]),
    };
    let mut body = body;
    while let Some(last) = body.last() {
        let piece = &text[last.byte_range.clone()];
        let trailing_sep = last.kind == SpanKind::Punctuation && matches!(piece, "." | ";" | ",");
        if trailing_sep || (last.kind == SpanKind::Text && piece.trim().is_empty()) {
            body = &body[..body.len() - 1];
        } else {
            break;
        }
    }
    let (start, end) = match (body.first(), body.last()) {
        (Some(f), Some(l)) => (f.byte_range.start, l.byte_range.end),
        _ => (0, 0),
    };
    let piece = &text[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let trimmed = piece.trim();
    let s = start + lead;
    let spans = body
        .iter()
        .filter(|t| t.kind == SpanKind::Math)
        .map(|t| MathSpan {
            raw: text[t.byte_range.start + 1..t.byte_range.end - 1].to_string(),
            byte_range: t.byte_range.clone(),
        })
        .collect();
    Ok(Sentence {
        text: trimmed.to_string(),
        byte_range: s..s + trimmed.len(),
        spans,
        section,
    })
}
