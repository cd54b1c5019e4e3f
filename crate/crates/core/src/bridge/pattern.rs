//! Restricted sentence patterns.
//!
//! The accepted subset is deliberately small: literal characters, escaped
//! punctuation (`\.`, `\*`, `\\`), the classes `\d+`, `\w+` and `\s+`, and
//! plain parenthesized capture groups. A run of literal whitespace matches
//! any run of whitespace. Alternation, other quantifiers, character sets,
//! anchors, backreferences and non-capturing groups are rejected.
//!
//! Captures are the explicit groups plus every `\d+` that is not inside a
//! group, numbered from 1 by their starting position. Matching is anchored
//! at both ends and runs on a finite-automaton engine, so it is linear in
//! the input length.

use std::ops::Range;

use regex::Regex;

use super::BridgeError;

#[derive(Debug, Clone)]
pub struct Matcher {
    source: String,
    regex: Regex,
    captures: usize,
}

impl Matcher {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of capture slots.
    pub fn capture_count(&self) -> usize {
        self.captures
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }

    /// Captured texts, in slot order, if `text` matches as a whole.
    pub fn captures(&self, text: &str) -> Option<Vec<String>> {
        self.capture_ranges(text)
            .map(|rs| rs.into_iter().map(|r| text[r].to_string()).collect())
    }

    /// Byte ranges of the captures, in slot order.
    pub fn capture_ranges(&self, text: &str) -> Option<Vec<Range<usize>>> {
        let caps = self.regex.captures(text)?;
        Some(
            (1..=self.captures)
                .map(|i| caps.get(i).map(|m| m.range()).unwrap_or(0..0))
                .collect(),
        )
    }
}

fn unsupported(pattern: &str, offset: usize, construct: impl Into<String>) -> BridgeError {
    BridgeError::PatternUnsupported {
        pattern: pattern.to_string(),
        offset,
        construct: construct.into(),
    }
}

/// Compiles a restricted pattern into an anchored matcher.
pub fn compile_pattern(pattern: &str) -> Result<Matcher, BridgeError> {
    let mut out = String::from("^(?:");
    let mut captures = 0usize;
    let mut depth = 0usize;
    let mut chars = pattern.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                let Some((_, e)) = chars.next() else {
                    return Err(unsupported(pattern, i, "trailing backslash"));
                };
                match e {
                    'd' | 'w' | 's' => {
                        if chars.peek().map(|p| p.1) != Some('+') {
                            return Err(unsupported(pattern, i, format!("\\{e} without +")));
                        }
                        chars.next();
                        if e == 'd' && depth == 0 {
                            captures += 1;
                            out.push_str(r"(\d+)");
                        } else {
                            out.push_str(match e {
                                'd' => r"\d+",
                                'w' => r"\w+",
                                _ => r"\s+",
                            });
                        }
                    }
                    e if e.is_alphanumeric() || e.is_whitespace() => {
                        return Err(unsupported(pattern, i, format!("escape \\{e}")));
                    }
                    e => out.push_str(&regex::escape(&e.to_string())),
                }
            }
            '(' => {
                if chars.peek().map(|p| p.1) == Some('?') {
                    return Err(unsupported(pattern, i, "group modifier"));
                }
                depth += 1;
                captures += 1;
                out.push('(');
            }
            ')' => {
                if depth == 0 {
                    return Err(unsupported(pattern, i, "unbalanced `)`"));
                }
                depth -= 1;
                out.push(')');
            }
            '|' | '*' | '+' | '?' | '{' | '}' | '[' | ']' | '.' | '^' | '$' => {
                return Err(unsupported(pattern, i, format!("`{c}`")));
            }
            c if c.is_whitespace() => {
                while chars.peek().is_some_and(|p| p.1.is_whitespace()) {
                    chars.next();
                }
                out.push_str(r"\s+");
            }
            c => out.push_str(&regex::escape(&c.to_string())),
        }
    }
    if depth != 0 {
        return Err(unsupported(pattern, pattern.len(), "unclosed `(`"));
    }
    out.push_str(")$");
    let regex = Regex::new(&out).map_err(|e| unsupported(pattern, 0, e.to_string()))?;
    Ok(Matcher {
        source: pattern.to_string(),
        regex,
        captures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_pattern_has_two_slots() {
        let m = compile_pattern(r"\d+ be an equivalence relation on \d+").unwrap();
        assert_eq!(m.capture_count(), 2);
        assert_eq!(
            m.captures("1000 be an equivalence relation on 1001").unwrap(),
            vec!["1000", "1001"]
        );
        assert_eq!(
            m.captures("1000  be an\n equivalence relation on 1001").unwrap(),
            vec!["1000", "1001"]
        );
        assert!(m.captures("1000 be an equivalence relation on 1001 too").is_none());
        assert!(m.captures("x 1000 be an equivalence relation on 1001").is_none());
    }

    #[test]
    fn empty_pattern_matches_only_empty() {
        let m = compile_pattern("").unwrap();
        assert_eq!(m.capture_count(), 0);
        assert!(m.is_match(""));
        assert!(!m.is_match("a"));
    }

    #[test]
    fn rejects_constructs_outside_subset() {
        for p in [r"\d+ (a|b)", r"a*", r"a+", r"a?", r"[ab]", r"a{2}", r"\1", r"\b", r"(?:a)", r"\d", r"a.b", r"(a", r"a)", "^a"] {
            let err = compile_pattern(p).unwrap_err();
            assert_eq!(err.code(), "E_PATTERN_UNSUPPORTED", "{p}");
        }
    }

    #[test]
    fn groups_and_escapes() {
        let m = compile_pattern(r"(\w+)\*(\w+)=(\w+)").unwrap();
        assert_eq!(m.capture_count(), 3);
        assert_eq!(m.captures("x*x=e").unwrap(), vec!["x", "x", "e"]);
        let m = compile_pattern(r"(\w+)\\in (\w+)").unwrap();
        assert_eq!(m.captures(r"x\in G").unwrap(), vec!["x", "G"]);
        // \d+ inside a group is not a separate slot
        let m = compile_pattern(r"(\d+) and \d+").unwrap();
        assert_eq!(m.capture_count(), 2);
        let m = compile_pattern(r"order \d+\.").unwrap();
        assert!(m.is_match("order 8."));
    }
}
