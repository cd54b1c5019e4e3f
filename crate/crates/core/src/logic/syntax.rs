//! Textual clause syntax.
//!
//! ```text
//! clause   := head [ ":-" body ] "."
//! head     := "falsum" | molecules
//! body     := molecules
//! molecule := term [ ":" ident ] [ "[" ident "->" term { "," ident "->" term } "]" ]
//! term     := variable | integer | ident [ "(" term { "," term } ")" ]
//! ```
//!
//! Printing is canonical: no spaces inside argument lists, `", "` between
//! atoms and between frame attributes, `" :- "` before the body.

use std::collections::BTreeMap;

use super::{Atom, Clause, Head, LogicError, SymbolRegistry, Term, FALSUM};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Implied,
    Arrow,
    Period,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, LogicError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest.find(|c: char| !pred(c)).unwrap_or(rest.len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, LogicError> {
        self.take_while(char::is_whitespace);
        let start = self.pos;
        let Some(c) = self.src[start..].chars().next() else {
            return Ok(None);
        };
        let ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_';
        let tok = match c {
            '(' => self.single(Tok::LParen),
            ')' => self.single(Tok::RParen),
            '[' => self.single(Tok::LBracket),
            ']' => self.single(Tok::RBracket),
            ',' => self.single(Tok::Comma),
            '.' => self.single(Tok::Period),
            ':' => {
                if self.src[start..].starts_with(":-") {
                    self.pos += 2;
                    Tok::Implied
                } else {
                    self.single(Tok::Colon)
                }
            }
            '-' => {
                if self.src[start..].starts_with("->") {
                    self.pos += 2;
                    Tok::Arrow
                } else {
                    return Err(self.err(start, "unexpected `-`"));
                }
            }
            '?' => {
                self.pos += 1;
                let name = self.take_while(ident_char);
                if name.is_empty() {
                    return Err(self.err(start, "`?` must be followed by a variable name"));
                }
                Tok::Var(format!("?{name}"))
            }
            c if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                if self.src[self.pos..].starts_with(ident_char) {
                    return Err(self.err(start, "identifiers cannot start with a digit"));
                }
                Tok::Int(digits.to_string())
            }
            c if c.is_ascii_alphabetic() || c == '_' => Tok::Ident(self.take_while(ident_char).to_string()),
            other => return Err(self.err(start, format!("unexpected character `{other}`"))),
        };
        Ok(Some((tok, start)))
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.pos += 1;
        tok
    }
}

struct Parser<'r> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    arities: BTreeMap<String, usize>,
    registry: Option<&'r SymbolRegistry>,
}

impl<'r> Parser<'r> {
    fn new(src: &str, registry: Option<&'r SymbolRegistry>) -> Result<Self, LogicError> {
        Ok(Parser {
            toks: Lexer::tokens(src)?,
            idx: 0,
            end: src.len(),
            arities: BTreeMap::new(),
            registry,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    fn clause(&mut self) -> Result<Clause, LogicError> {
        let head = if matches!(self.peek(), Some(Tok::Ident(name)) if name == FALSUM) {
            self.idx += 1;
            Head::Falsum
        } else {
            Head::Atoms(self.molecules()?)
        };
        let body = if self.peek() == Some(&Tok::Implied) {
            self.idx += 1;
            self.molecules()?
        } else {
            Vec::new()
        };
        if head.is_falsum() && body.is_empty() {
            return Err(self.err("`falsum` cannot be stated as a fact"));
        }
        self.expect(Tok::Period, "`.` after clause")?;
        Ok(Clause {
            head,
            body,
            id: None,
            provenance: None,
        })
    }

    fn molecules(&mut self) -> Result<Vec<Atom>, LogicError> {
        let mut atoms = Vec::new();
        self.molecule(&mut atoms)?;
        while self.peek() == Some(&Tok::Comma) {
            self.idx += 1;
            self.molecule(&mut atoms)?;
        }
        Ok(atoms)
    }

    fn molecule(&mut self, out: &mut Vec<Atom>) -> Result<(), LogicError> {
        let start = self.offset();
        if matches!(self.peek(), Some(Tok::Ident(name)) if name == FALSUM) {
            return Err(self.err("`falsum` is only allowed as a clause head"));
        }
        let term = self.term()?;
        let mut framed = false;
        if self.peek() == Some(&Tok::Colon) {
            self.idx += 1;
            let class = self.ident("class name")?;
            out.push(Atom::Membership {
                instance: term.clone(),
                class,
            });
            framed = true;
        }
        if self.peek() == Some(&Tok::LBracket) {
            self.idx += 1;
            loop {
                let attribute = self.ident("attribute name")?;
                self.expect(Tok::Arrow, "`->`")?;
                let value = self.term()?;
                out.push(Atom::Frame {
                    instance: term.clone(),
                    attribute,
                    value,
                });
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RBracket) => break,
                    _ => {
                        self.idx -= 1;
                        return Err(self.err("expected `,` or `]` in frame"));
                    }
                }
            }
            framed = true;
        }
        if framed {
            return Ok(());
        }
        let atom = match term {
            Term::Constant(name) if !name.starts_with(|c: char| c.is_ascii_digit()) => Atom::Predicate { name, args: vec![] },
            Term::Compound { functor, args } => Atom::Predicate { name: functor, args },
            _ => {
                return Err(LogicError::Syntax {
                    offset: start,
                    message: "expected an atom, found a bare term".into(),
                })
            }
        };
        self.note_predicate(&atom)?;
        out.push(atom);
        Ok(())
    }

    fn note_predicate(&mut self, atom: &Atom) -> Result<(), LogicError> {
        let Atom::Predicate { name, args } = atom else {
            return Ok(());
        };
        let known = self.arities.get(name).copied().or_else(|| {
            self.registry
                .and_then(|r| r.get(name))
                .filter(|e| e.kind == super::SymbolKind::Predicate)
                .map(|e| e.arity)
        });
        match known {
            Some(expected) if expected != args.len() => Err(LogicError::ArityClash {
                name: name.clone(),
                expected,
                found: args.len(),
            }),
            _ => {
                self.arities.insert(name.clone(), args.len());
                Ok(())
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, LogicError> {
        match self.peek() {
            Some(Tok::Ident(name)) if name != FALSUM => {
                let name = name.clone();
                self.idx += 1;
                Ok(name)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        match self.bump() {
            Some(Tok::Var(name)) => Ok(Term::Variable(name)),
            Some(Tok::Int(digits)) => Ok(Term::Constant(digits)),
            Some(Tok::Ident(name)) => {
                if name == FALSUM {
                    self.idx -= 1;
                    return Err(self.err("`falsum` is reserved"));
                }
                if self.peek() != Some(&Tok::LParen) {
                    return Ok(Term::from_ident(name));
                }
                self.idx += 1;
                let mut args = vec![self.term()?];
                loop {
                    match self.bump() {
                        Some(Tok::Comma) => args.push(self.term()?),
                        Some(Tok::RParen) => break,
                        _ => {
                            self.idx -= 1;
                            return Err(self.err("expected `,` or `)`"));
                        }
                    }
                }
                Ok(Term::Compound { functor: name, args })
            }
            _ => {
                self.idx = self.idx.saturating_sub(1);
                Err(self.err("expected a term"))
            }
        }
    }
}

/// Parses one clause. Predicate arities must be consistent within the
/// clause.
pub fn parse_formula(text: &str) -> Result<Clause, LogicError> {
    parse_single(text, None)
}

/// Parses one clause, additionally checking predicate arities against
/// `registry`.
pub fn parse_formula_in(text: &str, registry: &SymbolRegistry) -> Result<Clause, LogicError> {
    parse_single(text, Some(registry))
}

fn parse_single(text: &str, registry: Option<&SymbolRegistry>) -> Result<Clause, LogicError> {
    let mut p = Parser::new(text, registry)?;
    let clause = p.clause()?;
    if !p.at_end() {
        return Err(p.err("trailing input after clause"));
    }
    Ok(clause)
}

/// Parses a sequence of clauses, one after the other. Lines starting with
/// `#` are comments.
pub fn parse_program(text: &str) -> Result<Vec<Clause>, LogicError> {
    let stripped = strip_comments(text);
    let mut p = Parser::new(&stripped, None)?;
    let mut out = Vec::new();
    while !p.at_end() {
        p.arities.clear();
        out.push(p.clause()?);
    }
    Ok(out)
}

fn strip_comments(text: &str) -> String {
    // Comment lines are blanked rather than removed so offsets stay valid.
    text.split_inclusive('\n')
        .map(|line| {
            if line.trim_start().starts_with('#') {
                line.chars().map(|c| if c == '\n' { '\n' } else { ' ' }).collect()
            } else {
                line.to_string()
            }
        })
        .collect()
}

/// Parses exactly one atom (a molecule expanding to a single atom).
pub fn parse_atom(text: &str) -> Result<Atom, LogicError> {
    let mut p = Parser::new(text, None)?;
    let mut atoms = Vec::new();
    p.molecule(&mut atoms)?;
    if !p.at_end() {
        return Err(p.err("trailing input after atom"));
    }
    if atoms.len() != 1 {
        return Err(LogicError::Syntax {
            offset: 0,
            message: format!("expected one atom, molecule expands to {}", atoms.len()),
        });
    }
    Ok(atoms.remove(0))
}

/// Canonical text of a clause.
pub fn print_formula(clause: &Clause) -> String {
    let mut out = match &clause.head {
        Head::Falsum => FALSUM.to_string(),
        Head::Atoms(atoms) => print_atoms(atoms),
    };
    if !clause.body.is_empty() {
        out.push_str(" :- ");
        out.push_str(&print_atoms(&clause.body));
    }
    out.push('.');
    out
}

/// Prints a conjunction, regrouping membership and frame atoms that share
/// an instance into molecules.
pub(super) fn print_atoms(atoms: &[Atom]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < atoms.len() {
        match &atoms[i] {
            Atom::Predicate { name, args } => {
                if args.is_empty() {
                    parts.push(name.clone());
                } else {
                    parts.push(Term::Compound { functor: name.clone(), args: args.clone() }.to_string());
                }
                i += 1;
            }
            Atom::Membership { instance, class } => {
                let mut s = format!("{instance}:{class}");
                i += 1;
                let frames = collect_frames(atoms, &mut i, instance);
                if !frames.is_empty() {
                    s.push_str(&format!("[{}]", frames.join(", ")));
                }
                parts.push(s);
            }
            Atom::Frame { instance, .. } => {
                let frames = collect_frames(atoms, &mut i, instance);
                parts.push(format!("{instance}[{}]", frames.join(", ")));
            }
        }
    }
    parts.join(", ")
}

fn collect_frames(atoms: &[Atom], i: &mut usize, inst: &Term) -> Vec<String> {
    let mut frames = Vec::new();
    while let Some(Atom::Frame {
        instance,
        attribute,
        value,
    }) = atoms.get(*i)
    {
        if instance != inst {
            break;
        }
        frames.push(format!("{attribute}->{value}"));
        *i += 1;
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_ONE: &str =
        "either_true(isomorphic(?P,D_8),isomorphic(?P,Q_8)) :- ?P:nonabelian_group[order->8].";

    #[test]
    fn annotation_rule_parses_to_rule() {
        let c = parse_formula(EXAMPLE_ONE).unwrap();
        let p = Term::var("?P");
        assert_eq!(
            c.head,
            Head::Atoms(vec![Atom::pred(
                "either_true",
                vec![
                    Term::compound("isomorphic", vec![p.clone(), Term::constant("D_8")]),
                    Term::compound("isomorphic", vec![p.clone(), Term::constant("Q_8")]),
                ]
            )])
        );
        assert_eq!(
            c.body,
            vec![
                Atom::member(p.clone(), "nonabelian_group"),
                Atom::frame(p, "order", Term::constant("8")),
            ]
        );
        assert_eq!(print_formula(&c), EXAMPLE_ONE);
    }

    #[test]
    fn annotation_rule_with_original_line_break() {
        let text = "either_true(isomorphic(?P,D_8),isomorphic(?P,Q_8)) :-\n                                  ?P:nonabelian_group[order->8].";
        assert_eq!(print_formula(&parse_formula(text).unwrap()), EXAMPLE_ONE);
    }

    #[test]
    fn minimal_fact() {
        let c = parse_formula("p(a).").unwrap();
        assert!(c.is_fact());
        assert_eq!(c.head, Head::Atoms(vec![Atom::pred("p", vec![Term::constant("a")])]));
        assert_eq!(print_formula(&c), "p(a).");
    }

    #[test]
    fn var_prefixed_molecule() {
        let text = "var_sim:EquivalenceRelation[base_set->var_S].";
        let c = parse_formula(text).unwrap();
        assert_eq!(
            c.head.atoms(),
            &[
                Atom::member(Term::var("var_sim"), "EquivalenceRelation"),
                Atom::frame(Term::var("var_sim"), "base_set", Term::var("var_S")),
            ]
        );
        assert_eq!(print_formula(&c), text);
    }

    #[test]
    fn multi_attribute_frame_expands() {
        let c = parse_formula("g:Group[identity->e, operation->m].").unwrap();
        assert_eq!(c.head.atoms().len(), 3);
        assert_eq!(print_formula(&c), "g:Group[identity->e, operation->m].");
    }

    #[test]
    fn constraint_and_errors() {
        let c = parse_formula("falsum :- p(?X), q(?X).").unwrap();
        assert!(c.is_constraint());
        assert_eq!(print_formula(&c), "falsum :- p(?X), q(?X).");
        assert!(matches!(parse_formula("falsum."), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("p(a)"), Err(LogicError::Syntax { offset: 4, .. })));
        assert!(matches!(parse_formula("p(a) :- falsum."), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("p()."), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("?X."), Err(LogicError::Syntax { .. })));
    }

    #[test]
    fn arity_clash_within_clause() {
        let err = parse_formula("p(a) :- p(a,b).").unwrap_err();
        assert_eq!(
            err,
            LogicError::ArityClash {
                name: "p".into(),
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn arity_clash_against_registry() {
        let mut reg = SymbolRegistry::default();
        reg.register("p", super::super::SymbolKind::Predicate, 2).unwrap();
        assert!(matches!(parse_formula_in("p(a).", &reg), Err(LogicError::ArityClash { .. })));
        assert!(parse_formula_in("p(a,b).", &reg).is_ok());
    }

    #[test]
    fn program_with_comments() {
        let text = "# header\np(a).\n  # note\nq(?X) :- p(?X).\n";
        let clauses = parse_program(text).unwrap();
        assert_eq!(clauses.len(), 2);
        // arities are per clause in a program
        assert!(parse_program("p(a). p(a,b).").is_ok());
    }

    #[test]
    fn atoms_parse_individually() {
        assert_eq!(parse_atom("t:C").unwrap(), Atom::member(Term::constant("t"), "C"));
        assert_eq!(parse_atom("zero").unwrap(), Atom::pred("zero", vec![]));
        assert!(parse_atom("t:C[a->b]").is_err());
    }
}
