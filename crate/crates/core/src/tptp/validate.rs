//! Parser for the FOF subset the exporter emits.

use std::collections::BTreeSet;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FofFinding {
    /// 1-based line number.
    pub line: usize,
    pub error: String,
}

const ROLES: &[&str] = &[
    "axiom",
    "hypothesis",
    "definition",
    "lemma",
    "theorem",
    "conjecture",
    "negated_conjecture",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(String),
    Dollar(String),
    Punct(&'static str),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end_line: usize,
}

fn lex(src: &str, first_line: usize) -> Result<Lexed, FofFinding> {
    let mut toks = Vec::new();
    let mut line = first_line;
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '%' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let word = |i: usize| {
            let mut j = i;
            while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                j += 1;
            }
            j
        };
        if c.is_ascii_lowercase() {
            let j = word(i);
            toks.push((Tok::Lower(src[i..j].to_string()), line));
            i = j;
        } else if c.is_ascii_uppercase() || c == '_' {
            let j = word(i);
            toks.push((Tok::Upper(src[i..j].to_string()), line));
            i = j;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if j < b.len() && (b[j].is_ascii_alphabetic() || b[j] == b'_') {
                return Err(FofFinding {
                    line,
                    error: "a word cannot start with a digit".into(),
                });
            }
            toks.push((Tok::Int(src[i..j].to_string()), line));
            i = j;
        } else if c == '$' {
            let j = word(i + 1);
            toks.push((Tok::Dollar(src[i..j].to_string()), line));
            i = j;
        } else {
            let rest = &src[i..];
            let p = ["<=>", "=>", "(", ")", "[", "]", ",", ".", ":", "&", "|", "~", "!", "?"]
                .into_iter()
                .find(|p| rest.starts_with(p));
            match p {
                Some(p) => {
                    toks.push((Tok::Punct(p), line));
                    i += p.len();
                }
                None => {
                    return Err(FofFinding {
                        line,
                        error: format!("unexpected character `{}`", rest.chars().next().unwrap_or(c)),
                    })
                }
            }
        }
    }
    Ok(Lexed { toks, end_line: line })
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end_line: usize,
    bound: Vec<String>,
}

type PResult<T> = Result<T, FofFinding>;

impl<'a> Parser<'a> {
    fn line(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_line)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(FofFinding {
            line: self.line(),
            error: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.is(p) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{p}`"))
        }
    }

    fn statement(&mut self) -> PResult<()> {
        match self.peek() {
            Some(Tok::Lower(w)) if w == "fof" => self.pos += 1,
            _ => return self.err("expected `fof`"),
        }
        self.expect("(")?;
        match self.peek() {
            Some(Tok::Lower(_)) | Some(Tok::Int(_)) => self.pos += 1,
            Some(Tok::Upper(n)) => return self.err(format!("formula name `{n}` must start with a lowercase letter")),
            _ => return self.err("expected a formula name"),
        }
        self.expect(",")?;
        match self.peek() {
            Some(Tok::Lower(r)) if ROLES.contains(&r.as_str()) => self.pos += 1,
            Some(Tok::Lower(r)) => return self.err(format!("unknown role `{r}`")),
            _ => return self.err("expected a role"),
        }
        self.expect(",")?;
        self.formula()?;
        self.expect(")")?;
        self.expect(".")?;
        if self.pos < self.toks.len() {
            return self.err("unexpected text after the end of the statement");
        }
        Ok(())
    }

    fn formula(&mut self) -> PResult<()> {
        self.unary()?;
        if self.is("=>") || self.is("<=>") {
            self.pos += 1;
            return self.unary();
        }
        for op in ["&", "|"] {
            if self.is(op) {
                while self.is(op) {
                    self.pos += 1;
                    self.unary()?;
                }
                if self.is("&") || self.is("|") || self.is("=>") || self.is("<=>") {
                    return self.err("mixed connectives need parentheses");
                }
                return Ok(());
            }
        }
        Ok(())
    }

    fn unary(&mut self) -> PResult<()> {
        if self.is("~") {
            self.pos += 1;
            return self.unary();
        }
        if self.is("!") || self.is("?") {
            self.pos += 1;
            self.expect("[")?;
            let mark = self.bound.len();
            loop {
                match self.peek() {
                    Some(Tok::Upper(v)) => {
                        let v = v.clone();
                        self.bound.push(v);
                        self.pos += 1;
                    }
                    Some(Tok::Lower(v)) => return self.err(format!("variable `{v}` must start with an uppercase letter")),
                    _ => return self.err("expected a variable"),
                }
                if self.is(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.expect("]")?;
            self.expect(":")?;
            let r = self.unary();
            self.bound.truncate(mark);
            return r;
        }
        if self.is("(") {
            self.pos += 1;
            self.formula()?;
            return self.expect(")");
        }
        match self.peek().cloned() {
            Some(Tok::Dollar(w)) if w == "$true" || w == "$false" => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::Dollar(w)) => self.err(format!("unsupported defined word `{w}`")),
            Some(Tok::Lower(_)) => {
                self.pos += 1;
                self.args()
            }
            Some(Tok::Upper(w)) => self.err(format!("predicate `{w}` must start with a lowercase letter")),
            Some(Tok::Int(n)) => self.err(format!("number `{n}` is not a formula")),
            _ => self.err("expected a formula"),
        }
    }

    fn args(&mut self) -> PResult<()> {
        if !self.is("(") {
            return Ok(());
        }
        self.pos += 1;
        loop {
            self.term()?;
            if self.is(",") {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect(")")
    }

    fn term(&mut self) -> PResult<()> {
        match self.peek().cloned() {
            Some(Tok::Upper(v)) => {
                if !self.bound.contains(&v) {
                    return self.err(format!("variable `{v}` is not bound by a quantifier"));
                }
                self.pos += 1;
                Ok(())
            }
            Some(Tok::Lower(_)) => {
                self.pos += 1;
                self.args()
            }
            Some(Tok::Int(_)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected a term"),
        }
    }
}

fn check_statement(text: &str, first_line: usize) -> PResult<()> {
    let lexed = lex(text, first_line)?;
    let mut depth: i64 = 0;
    for (t, line) in &lexed.toks {
        match t {
            Tok::Punct("(") => depth += 1,
            Tok::Punct(")") => {
                depth -= 1;
                if depth < 0 {
                    return Err(FofFinding {
                        line: *line,
                        error: "unbalanced parentheses: unexpected `)`".into(),
                    });
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(FofFinding {
            line: first_line,
            error: "unbalanced parentheses: missing `)`".into(),
        });
    }
    let mut p = Parser {
        toks: &lexed.toks,
        pos: 0,
        end_line: lexed.end_line,
        bound: Vec::new(),
    };
    p.statement()
}

/// Checks a document of `fof` statements. A statement starts on a line
/// beginning with `fof(` and runs until the next such line. Lines starting
/// with `%` are comments.
pub fn validate_fof(document: &str) -> Result<(), Vec<FofFinding>> {
    let mut findings = Vec::new();
    let mut names = BTreeSet::new();
    let mut current: Option<(usize, String)> = None;
    let mut flush = |cur: Option<(usize, String)>, findings: &mut Vec<FofFinding>| {
        if let Some((line, text)) = cur {
            if let Err(f) = check_statement(&text, line) {
                findings.push(f);
            } else if let Some(name) = statement_name(&text) {
                if !names.insert(name.clone()) {
                    findings.push(FofFinding {
                        line,
                        error: format!("duplicate formula name `{name}`"),
                    });
                }
            }
        }
    };
    for (i, raw) in document.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if trimmed.starts_with("fof(") || trimmed.starts_with("fof (") {
            flush(current.take(), &mut findings);
            current = Some((line, format!("{raw}\n")));
        } else if let Some((_, text)) = current.as_mut() {
            text.push_str(raw);
            text.push('\n');
        } else if !(trimmed.is_empty() || trimmed.starts_with('%')) {
            findings.push(FofFinding {
                line,
                error: "text outside a fof statement".into(),
            });
        }
    }
    flush(current.take(), &mut findings);
    if findings.is_empty() {
        Ok(())
    } else {
        Err(findings)
    }
}

fn statement_name(text: &str) -> Option<String> {
    let open = text.find('(')?;
    let comma = text[open..].find(',')? + open;
    Some(text[open + 1..comma].trim().to_string())
}
