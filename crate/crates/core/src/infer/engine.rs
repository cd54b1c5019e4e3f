//! Proof search over interned terms.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use super::{Goal, Justification, Limits, NodeAtom, Outcome, ProofTree, Stats, Verdict};
use crate::kb::KnowledgeBase;
use crate::logic::{Atom, Clause, Head, Term};

const RELEVANT_K: usize = 20;

type Sym = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum T {
    V(u32),
    C(Sym),
    F(Sym, Rc<[T]>),
}

impl T {
    fn is_ground(&self) -> bool {
        match self {
            T::V(_) => false,
            T::C(_) => true,
            T::F(_, args) => args.iter().all(T::is_ground),
        }
    }

    fn depth(&self) -> u32 {
        match self {
            T::V(_) | T::C(_) => 0,
            T::F(_, args) => 1 + args.iter().map(T::depth).max().unwrap_or(0),
        }
    }

    fn shift(&self, off: u32) -> T {
        match self {
            T::V(v) => T::V(v + off),
            T::C(_) => self.clone(),
            T::F(f, args) => {
                if self.is_ground() {
                    self.clone()
                } else {
                    T::F(*f, args.iter().map(|a| a.shift(off)).collect())
                }
            }
        }
    }
}

/// Atom kinds: predicate, membership (class name, [instance]) and frame
/// (attribute name, [instance, value]).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct A {
    kind: u8,
    name: Sym,
    args: Vec<T>,
}

type Key = (u8, Sym, usize);

impl A {
    fn key(&self) -> Key {
        (self.kind, self.name, self.args.len())
    }

    fn is_ground(&self) -> bool {
        self.args.iter().all(T::is_ground)
    }

    fn depth(&self) -> u32 {
        self.args.iter().map(T::depth).max().unwrap_or(0)
    }

    fn shift(&self, off: u32) -> A {
        A {
            kind: self.kind,
            name: self.name,
            args: self.args.iter().map(|t| t.shift(off)).collect(),
        }
    }
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, Sym>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> Sym {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as Sym;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }

    fn name(&self, s: Sym) -> &str {
        &self.names[s as usize]
    }

    fn term_in(&mut self, t: &Term, vars: &mut HashMap<String, u32>) -> T {
        match t {
            Term::Variable(v) => {
                let n = vars.len() as u32;
                T::V(*vars.entry(v.clone()).or_insert(n))
            }
            Term::Constant(c) => T::C(self.intern(c)),
            Term::Compound { functor, args } => {
                let f = self.intern(functor);
                T::F(f, args.iter().map(|a| self.term_in(a, vars)).collect())
            }
        }
    }

    fn atom_in(&mut self, a: &Atom, vars: &mut HashMap<String, u32>) -> A {
        match a {
            Atom::Predicate { name, args } => A {
                kind: 0,
                name: self.intern(name),
                args: args.iter().map(|t| self.term_in(t, vars)).collect(),
            },
            Atom::Membership { instance, class } => A {
                kind: 1,
                name: self.intern(class),
                args: vec![self.term_in(instance, vars)],
            },
            Atom::Frame {
                instance,
                attribute,
                value,
            } => A {
                kind: 2,
                name: self.intern(attribute),
                args: vec![self.term_in(instance, vars), self.term_in(value, vars)],
            },
        }
    }

    fn term_out(&self, t: &T) -> Term {
        match t {
            T::V(v) => Term::Variable(format!("?_{v}")),
            T::C(c) => Term::Constant(self.name(*c).to_string()),
            T::F(f, args) => Term::Compound {
                functor: self.name(*f).to_string(),
                args: args.iter().map(|a| self.term_out(a)).collect(),
            },
        }
    }

    fn atom_out(&self, a: &A) -> Atom {
        let name = self.name(a.name).to_string();
        match a.kind {
            0 => Atom::Predicate {
                name,
                args: a.args.iter().map(|t| self.term_out(t)).collect(),
            },
            1 => Atom::Membership {
                instance: self.term_out(&a.args[0]),
                class: name,
            },
            _ => Atom::Frame {
                instance: self.term_out(&a.args[0]),
                attribute: name,
                value: self.term_out(&a.args[1]),
            },
        }
    }
}

struct CRule {
    /// Empty for a constraint.
    heads: Vec<A>,
    body: Vec<A>,
    nvars: u32,
    just: Justification,
}

struct Program {
    interner: Interner,
    rules: Vec<CRule>,
    /// Candidate (rule, head index) pairs per atom key, facts first.
    index: HashMap<Key, Vec<(usize, usize)>>,
}

impl Program {
    fn build<'a>(clauses: impl Iterator<Item = (Justification, &'a Clause)>) -> Program {
        let mut interner = Interner::default();
        let mut rules = Vec::new();
        for (just, c) in clauses {
            let mut vars = HashMap::new();
            let heads = match &c.head {
                Head::Falsum => Vec::new(),
                Head::Atoms(atoms) => atoms.iter().map(|a| interner.atom_in(a, &mut vars)).collect(),
            };
            let body = c.body.iter().map(|a| interner.atom_in(a, &mut vars)).collect();
            rules.push(CRule {
                heads,
                body,
                nvars: vars.len() as u32,
                just,
            });
        }
        let mut facts: HashMap<Key, Vec<(usize, usize)>> = HashMap::new();
        let mut others: HashMap<Key, Vec<(usize, usize)>> = HashMap::new();
        for (ri, r) in rules.iter().enumerate() {
            let target = if r.body.is_empty() { &mut facts } else { &mut others };
            for (hi, h) in r.heads.iter().enumerate() {
                target.entry(h.key()).or_default().push((ri, hi));
            }
        }
        for (k, v) in others {
            facts.entry(k).or_default().extend(v);
        }
        Program {
            interner,
            rules,
            index: facts,
        }
    }
}

#[derive(Debug)]
struct Exhausted;

struct Budget {
    steps: u64,
    limit: u64,
    deadline: Instant,
}

impl Budget {
    fn tick(&mut self) -> Result<(), Exhausted> {
        self.steps += 1;
        if self.steps > self.limit || (self.steps % 256 == 0 && Instant::now() >= self.deadline) {
            return Err(Exhausted);
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// forward chaining

struct Derivation {
    just: Justification,
    children: Vec<A>,
    /// Saturation round that first derived the atom. Facts are round 1,
    /// so this is also the minimal proof height.
    level: u32,
}

struct Forward<'p> {
    prog: &'p Program,
    facts: Vec<A>,
    known: HashMap<A, Derivation>,
    by_key: HashMap<Key, Vec<usize>>,
    by_arg: HashMap<(Key, usize, T), Vec<usize>>,
    term_depth: u32,
    /// Set when an atom was dropped for exceeding `term_depth`. Without
    /// it the saturated facts are the whole least model.
    truncated: bool,
}

fn match_term(p: &T, g: &T, binds: &mut [Option<T>], trail: &mut Vec<u32>) -> bool {
    match p {
        T::V(v) => match &binds[*v as usize] {
            Some(b) => b == g,
            None => {
                binds[*v as usize] = Some(g.clone());
                trail.push(*v);
                true
            }
        },
        T::C(_) => p == g,
        T::F(f, args) => match g {
            T::F(h, gargs) if f == h && args.len() == gargs.len() => {
                args.iter().zip(gargs.iter()).all(|(a, b)| match_term(a, b, binds, trail))
            }
            _ => false,
        },
    }
}

fn subst(t: &T, binds: &[Option<T>]) -> Option<T> {
    match t {
        T::V(v) => binds[*v as usize].clone(),
        T::C(_) => Some(t.clone()),
        T::F(f, args) => Some(T::F(
            *f,
            args.iter().map(|a| subst(a, binds)).collect::<Option<Vec<_>>>()?.into(),
        )),
    }
}

fn subst_atom(a: &A, binds: &[Option<T>]) -> Option<A> {
    Some(A {
        kind: a.kind,
        name: a.name,
        args: a.args.iter().map(|t| subst(t, binds)).collect::<Option<Vec<_>>>()?,
    })
}

enum Fired {
    Nothing,
    Falsum(Justification, Vec<A>),
}

impl<'p> Forward<'p> {
    fn add(&mut self, a: A, d: Derivation) -> bool {
        if self.known.contains_key(&a) {
            return false;
        }
        let idx = self.facts.len();
        self.by_key.entry(a.key()).or_default().push(idx);
        for (pos, t) in a.args.iter().enumerate() {
            self.by_arg.entry((a.key(), pos, t.clone())).or_default().push(idx);
        }
        self.known.insert(a.clone(), d);
        self.facts.push(a);
        true
    }

    /// Fact indices that might match `pat` under `binds`, from the most
    /// selective index, restricted to facts below `limit`.
    fn candidates(&self, pat: &A, binds: &[Option<T>], limit: usize) -> Vec<usize> {
        let key = pat.key();
        let mut best: Option<&Vec<usize>> = self.by_key.get(&key);
        for (pos, t) in pat.args.iter().enumerate() {
            if let Some(g) = subst(t, binds) {
                let list = self.by_arg.get(&(key, pos, g));
                match (list, best) {
                    (None, _) => return Vec::new(),
                    (Some(l), Some(b)) if l.len() < b.len() => best = Some(l),
                    _ => {}
                }
            }
        }
        best.map(|b| b.iter().copied().take_while(|&i| i < limit).collect())
            .unwrap_or_default()
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &self,
        body: &[A],
        order: &[usize],
        k: usize,
        binds: &mut Vec<Option<T>>,
        limit: usize,
        budget: &mut Budget,
        out: &mut Vec<Vec<Option<T>>>,
    ) -> Result<(), Exhausted> {
        if k == order.len() {
            out.push(binds.clone());
            return Ok(());
        }
        let pat = &body[order[k]];
        for i in self.candidates(pat, binds, limit) {
            budget.tick()?;
            let mut trail = Vec::new();
            if pat.args.len() == self.facts[i].args.len()
                && pat
                    .args
                    .iter()
                    .zip(&self.facts[i].args)
                    .all(|(p, g)| match_term(p, g, binds, &mut trail))
            {
                self.join(body, order, k + 1, binds, limit, budget, out)?;
            }
            for v in trail {
                binds[v as usize] = None;
            }
        }
        Ok(())
    }

    /// Saturates under the term-depth bound. Stops at the first fired
    /// constraint.
    fn run(&mut self, budget: &mut Budget) -> Result<Fired, Exhausted> {
        for r in &self.prog.rules {
            if r.body.is_empty() {
                if r.heads.is_empty() {
                    return Ok(Fired::Falsum(r.just, Vec::new()));
                }
                for h in &r.heads {
                    if h.depth() > self.term_depth {
                        self.truncated = true;
                    } else if h.is_ground() {
                        self.add(
                            h.clone(),
                            Derivation {
                                just: r.just,
                                children: Vec::new(),
                                level: 1,
                            },
                        );
                    }
                }
            }
        }
        let mut delta_start = 0;
        let mut level = 1;
        loop {
            level += 1;
            let limit = self.facts.len();
            if delta_start == limit {
                return Ok(Fired::Nothing);
            }
            let mut new: Vec<(A, Derivation)> = Vec::new();
            for r in self.prog.rules.iter().filter(|r| !r.body.is_empty()) {
                for i in 0..r.body.len() {
                    let mut order = vec![i];
                    order.extend((0..r.body.len()).filter(|&j| j != i));
                    let pat = &r.body[i];
                    let Some(delta) = self.by_key.get(&pat.key()) else { continue };
                    let delta: Vec<usize> = delta.iter().copied().filter(|&f| f >= delta_start && f < limit).collect();
                    for f in delta {
                        budget.tick()?;
                        let mut binds = vec![None; r.nvars as usize];
                        let mut trail = Vec::new();
                        let fact = &self.facts[f];
                        if !pat
                            .args
                            .iter()
                            .zip(&fact.args)
                            .all(|(p, g)| match_term(p, g, &mut binds, &mut trail))
                        {
                            continue;
                        }
                        let mut matches = Vec::new();
                        self.join(&r.body, &order, 1, &mut binds, limit, budget, &mut matches)?;
                        for m in matches {
                            let children: Vec<A> = r
                                .body
                                .iter()
                                .map(|b| subst_atom(b, &m).expect("body bound"))
                                .collect();
                            if r.heads.is_empty() {
                                return Ok(Fired::Falsum(r.just, children));
                            }
                            for h in &r.heads {
                                let Some(a) = subst_atom(h, &m) else { continue };
                                if a.depth() > self.term_depth {
                                    self.truncated = true;
                                    continue;
                                }
                                if self.known.contains_key(&a) {
                                    continue;
                                }
                                new.push((
                                    a,
                                    Derivation {
                                        just: r.just,
                                        children: children.clone(),
                                        level,
                                    },
                                ));
                            }
                        }
                    }
                }
            }
            delta_start = limit;
            for (a, d) in new {
                self.add(a, d);
            }
        }
    }

    fn tree(&self, a: &A) -> ProofTree {
        let d = &self.known[a];
        ProofTree {
            atom: NodeAtom::Atom(self.prog.interner.atom_out(a)),
            justification: d.just,
            children: d.children.iter().map(|c| self.tree(c)).collect(),
        }
    }
}

// ---------------------------------------------------------------------
// backward chaining

struct GoalInfo {
    atom: A,
    level: u32,
    parent: Option<usize>,
    /// Set while the goal is being proved in isolation as a ground atom.
    ground: Option<A>,
}

enum Step {
    Rule {
        goal: usize,
        just: Justification,
        children: Vec<usize>,
    },
    Ground {
        goal: usize,
        tree: Rc<ProofTree>,
    },
}

struct Sld<'p, 'b> {
    prog: &'p Program,
    budget: &'b mut Budget,
    binds: Vec<Option<T>>,
    trail: Vec<u32>,
    goals: Vec<GoalInfo>,
    log: Vec<Step>,
    max_depth: u32,
    cutoff: bool,
    min_prune: u32,
    memo_ok: HashMap<A, (u32, Rc<ProofTree>)>,
    /// Largest remaining depth at which a ground goal is known to fail;
    /// `u32::MAX` when it fails at any depth.
    memo_fail: HashMap<A, u32>,
    /// Minimal proof height of every derivable ground atom, when known.
    model: Option<HashMap<A, u32>>,
}

struct Mark {
    trail: usize,
    binds: usize,
}

impl<'p, 'b> Sld<'p, 'b> {
    fn walk(&self, t: &T) -> T {
        let mut t = t.clone();
        while let T::V(v) = t {
            match &self.binds[v as usize] {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &T) -> T {
        match self.walk(t) {
            T::F(f, args) => {
                if args.iter().all(T::is_ground) {
                    T::F(f, args)
                } else {
                    T::F(f, args.iter().map(|a| self.resolve(a)).collect())
                }
            }
            other => other,
        }
    }

    fn resolve_atom(&self, a: &A) -> A {
        A {
            kind: a.kind,
            name: a.name,
            args: a.args.iter().map(|t| self.resolve(t)).collect(),
        }
    }

    fn occurs(&self, v: u32, t: &T) -> bool {
        match self.walk(t) {
            T::V(w) => v == w,
            T::C(_) => false,
            T::F(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn bind(&mut self, v: u32, t: T) {
        self.binds[v as usize] = Some(t);
        self.trail.push(v);
    }

    fn unify(&mut self, a: &T, b: &T) -> bool {
        let a = self.walk(a);
        let b = self.walk(b);
        match (a, b) {
            (T::V(x), T::V(y)) if x == y => true,
            (T::V(x), t) | (t, T::V(x)) => {
                if self.occurs(x, &t) {
                    return false;
                }
                self.bind(x, t);
                true
            }
            (T::C(x), T::C(y)) => x == y,
            (T::F(f, xs), T::F(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn unify_atoms(&mut self, a: &A, b: &A) -> bool {
        a.key() == b.key() && a.args.iter().zip(&b.args).all(|(x, y)| self.unify(x, y))
    }

    fn mark(&self) -> Mark {
        Mark {
            trail: self.trail.len(),
            binds: self.binds.len(),
        }
    }

    fn undo(&mut self, m: &Mark) {
        while self.trail.len() > m.trail {
            let v = self.trail.pop().expect("non-empty");
            self.binds[v as usize] = None;
        }
        self.binds.truncate(m.binds);
    }

    fn alloc(&mut self, n: u32) -> u32 {
        let off = self.binds.len() as u32;
        self.binds.resize(self.binds.len() + n as usize, None);
        off
    }

    fn remaining(&self, g: usize) -> u32 {
        self.max_depth + 1 - self.goals[g].level
    }

    /// Proves every goal on `agenda` (top is last). On failure the agenda
    /// is left as it was.
    fn solve(&mut self, agenda: &mut Vec<usize>) -> Result<bool, Exhausted> {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.solve_inner(agenda))
    }

    fn solve_inner(&mut self, agenda: &mut Vec<usize>) -> Result<bool, Exhausted> {
        let Some(&top) = agenda.last() else {
            return Ok(true);
        };
        // ground goals first: they bind nothing, so one proof suffices
        let mut pos = agenda.len() - 1;
        let mut atom = self.resolve_atom(&self.goals[top].atom);
        if !atom.is_ground() {
            for p in (0..agenda.len() - 1).rev() {
                let a = self.resolve_atom(&self.goals[agenda[p]].atom);
                if a.is_ground() {
                    pos = p;
                    atom = a;
                    break;
                }
            }
        }
        let g = agenda.remove(pos);
        let ok = if atom.is_ground() {
            match self.prove_ground(g, atom)? {
                Some(tree) => {
                    self.log.push(Step::Ground { goal: g, tree });
                    let ok = self.solve(agenda)?;
                    if !ok {
                        self.log.pop();
                    }
                    ok
                }
                None => false,
            }
        } else {
            self.expand(g, &atom, agenda)?
        };
        if !ok {
            agenda.insert(pos, g);
        }
        Ok(ok)
    }

    /// Resolves goal `g` against each candidate clause, then continues
    /// with `agenda`.
    fn expand(&mut self, g: usize, atom: &A, agenda: &mut Vec<usize>) -> Result<bool, Exhausted> {
        let prog = self.prog;
        let Some(cands) = prog.index.get(&atom.key()) else {
            return Ok(false);
        };
        let level = self.goals[g].level;
        let remaining = self.remaining(g);
        for &(ri, hi) in cands {
            self.budget.tick()?;
            let rule = &prog.rules[ri];
            let mark = self.mark();
            let off = self.alloc(rule.nvars);
            let head = rule.heads[hi].shift(off);
            if self.unify_atoms(&head, atom) {
                if rule.body.is_empty() {
                    self.log.push(Step::Rule {
                        goal: g,
                        just: rule.just,
                        children: Vec::new(),
                    });
                    if self.solve(agenda)? {
                        return Ok(true);
                    }
                    self.log.pop();
                } else if remaining < 2 {
                    self.cutoff = true;
                } else {
                    let first = self.goals.len();
                    for b in &rule.body {
                        self.goals.push(GoalInfo {
                            atom: b.shift(off),
                            level: level + 1,
                            parent: Some(g),
                            ground: None,
                        });
                    }
                    let children: Vec<usize> = (first..self.goals.len()).collect();
                    agenda.extend(children.iter().rev());
                    self.log.push(Step::Rule {
                        goal: g,
                        just: rule.just,
                        children,
                    });
                    if self.solve(agenda)? {
                        return Ok(true);
                    }
                    self.log.pop();
                    agenda.truncate(agenda.len() - rule.body.len());
                    self.goals.truncate(first);
                }
            }
            self.undo(&mark);
        }
        Ok(false)
    }

    /// Finds one proof of a ground goal within its remaining depth,
    /// independently of the surrounding conjunction.
    fn prove_ground(&mut self, g: usize, atom: A) -> Result<Option<Rc<ProofTree>>, Exhausted> {
        let level = self.goals[g].level;
        let remaining = self.remaining(g);
        if let Some((h, tree)) = self.memo_ok.get(&atom) {
            if *h <= remaining {
                return Ok(Some(tree.clone()));
            }
        }
        if let Some(&r) = self.memo_fail.get(&atom) {
            if remaining <= r {
                if r != u32::MAX {
                    self.cutoff = true;
                }
                return Ok(None);
            }
        }
        if let Some(model) = &self.model {
            match model.get(&atom) {
                None => return Ok(None),
                Some(&h) if h > remaining => {
                    self.cutoff = true;
                    return Ok(None);
                }
                Some(_) => {}
            }
        }
        let mut p = self.goals[g].parent;
        while let Some(pi) = p {
            if self.goals[pi].ground.as_ref() == Some(&atom) {
                self.min_prune = self.min_prune.min(self.goals[pi].level);
                return Ok(None);
            }
            p = self.goals[pi].parent;
        }
        self.goals[g].ground = Some(atom.clone());
        let outer_cutoff = std::mem::replace(&mut self.cutoff, false);
        let outer_prune = std::mem::replace(&mut self.min_prune, u32::MAX);
        let mark = self.mark();
        let goals_len = self.goals.len();
        let log_len = self.log.len();
        let mut agenda = Vec::new();
        let found = self.expand(g, &atom, &mut agenda)?;
        let result = if found {
            let tree = Rc::new(self.build_tree(g, log_len));
            let h = tree.depth() as u32;
            match self.memo_ok.get(&atom) {
                Some((old, _)) if *old <= h => {}
                _ => {
                    self.memo_ok.insert(atom.clone(), (h, tree.clone()));
                }
            }
            Some(tree)
        } else {
            None
        };
        self.log.truncate(log_len);
        self.goals.truncate(goals_len);
        self.undo(&mark);
        self.goals[g].ground = None;
        let (cut, prune) = (self.cutoff, self.min_prune);
        if result.is_none() && prune >= level {
            let r = if cut { remaining } else { u32::MAX };
            let e = self.memo_fail.entry(atom).or_insert(0);
            *e = (*e).max(r);
        }
        self.cutoff = outer_cutoff || cut;
        self.min_prune = outer_prune.min(prune);
        Ok(result)
    }

    fn build_tree(&self, g: usize, log_from: usize) -> ProofTree {
        let steps: HashMap<usize, &Step> = self.log[log_from..]
            .iter()
            .map(|s| match s {
                Step::Rule { goal, .. } | Step::Ground { goal, .. } => (*goal, s),
            })
            .collect();
        self.tree_from(g, &steps)
    }

    fn tree_from(&self, g: usize, steps: &HashMap<usize, &Step>) -> ProofTree {
        match steps.get(&g) {
            Some(Step::Ground { tree, .. }) => (**tree).clone(),
            Some(Step::Rule { just, children, .. }) => ProofTree {
                atom: NodeAtom::Atom(self.prog.interner.atom_out(&self.resolve_atom(&self.goals[g].atom))),
                justification: *just,
                children: children.iter().map(|c| self.tree_from(*c, steps)).collect(),
            },
            None => unreachable!("every goal of a successful search has a step"),
        }
    }
}

/// Proves `goal` against `kb` within `limits`.
pub fn prove(goal: &Goal, kb: &KnowledgeBase, limits: &Limits) -> Verdict {
    prove_inner(goal, kb, limits, true)
}

/// `guide: false` runs the backward search without the saturated model,
/// which tests use to check that the guidance changes no verdict.
fn prove_inner(goal: &Goal, kb: &KnowledgeBase, limits: &Limits, guide: bool) -> Verdict {
    let start = Instant::now();
    let deadline = start + limits.time_budget;
    let hyps = goal
        .hypotheses
        .iter()
        .enumerate()
        .map(|(i, c)| (Justification::Hypothesis(i), c));
    let stored = kb
        .clauses()
        .filter_map(|c| c.id.map(|id| (Justification::Clause(id), c)));
    let mut prog = Program::build(hyps.chain(stored));
    let conclusions: Vec<A> = goal
        .conclusions
        .iter()
        .map(|a| prog.interner.atom_in(a, &mut HashMap::new()))
        .collect();
    let prog = prog;
    let mut total_steps = 0;
    let mut exhausted = false;

    // phase 1: consistency
    let mut budget = Budget {
        steps: 0,
        limit: limits.step_budget,
        deadline,
    };
    let mut fwd = Forward {
        prog: &prog,
        facts: Vec::new(),
        known: HashMap::new(),
        by_key: HashMap::new(),
        by_arg: HashMap::new(),
        term_depth: limits.term_depth.max(1),
        truncated: false,
    };
    match fwd.run(&mut budget) {
        Ok(Fired::Falsum(just, children)) => {
            let witness = ProofTree {
                atom: NodeAtom::Falsum,
                justification: just,
                children: children.iter().map(|c| fwd.tree(c)).collect(),
            };
            return Verdict {
                outcome: Outcome::Inconsistent { witness },
                budget_exhausted: false,
                stats: Stats {
                    depth_reached: 0,
                    steps: budget.steps,
                    millis: start.elapsed().as_millis() as u64,
                },
            };
        }
        Ok(Fired::Nothing) => {}
        Err(Exhausted) => exhausted = true,
    }
    total_steps += budget.steps;
    // Without truncation or exhaustion the saturation is the least model,
    // so it bounds the height of every ground subgoal.
    let model: Option<HashMap<A, u32>> = (guide && !exhausted && !fwd.truncated)
        .then(|| fwd.known.iter().map(|(a, d)| (a.clone(), d.level)).collect());
    drop(fwd);

    // phase 2: iterative deepening
    let mut budget = Budget {
        steps: 0,
        limit: limits.step_budget,
        deadline,
    };
    let mut sld = Sld {
        prog: &prog,
        budget: &mut budget,
        binds: Vec::new(),
        trail: Vec::new(),
        goals: Vec::new(),
        log: Vec::new(),
        max_depth: 0,
        cutoff: false,
        min_prune: u32::MAX,
        memo_ok: HashMap::new(),
        memo_fail: HashMap::new(),
        model,
    };
    let mut depth_reached = 0;
    let mut proofs = None;
    if Instant::now() >= deadline {
        exhausted = true;
    } else {
        for d in 1..=limits.max_depth.max(1) {
            depth_reached = d;
            sld.max_depth = d;
            sld.cutoff = false;
            sld.min_prune = u32::MAX;
            sld.binds.clear();
            sld.trail.clear();
            sld.log.clear();
            sld.goals = conclusions
                .iter()
                .map(|a| GoalInfo {
                    atom: a.clone(),
                    level: 1,
                    parent: None,
                    ground: None,
                })
                .collect();
            let mut agenda: Vec<usize> = (0..conclusions.len()).rev().collect();
            match sld.solve(&mut agenda) {
                Ok(true) => {
                    let trees: Vec<ProofTree> = (0..conclusions.len()).map(|g| sld.build_tree(g, 0)).collect();
                    proofs = Some(trees);
                    break;
                }
                Ok(false) if !sld.cutoff => break,
                Ok(false) => {}
                Err(Exhausted) => {
                    exhausted = true;
                    break;
                }
            }
        }
    }
    drop(sld);
    total_steps += budget.steps;
    let stats = |start: Instant| Stats {
        depth_reached,
        steps: total_steps,
        millis: start.elapsed().as_millis() as u64,
    };
    if let Some(proofs) = proofs {
        return Verdict {
            outcome: Outcome::Proved { proofs },
            budget_exhausted: false,
            stats: stats(start),
        };
    }

    // phase 3
    Verdict {
        outcome: Outcome::Unknown {
            relevant: kb.relevant_facts(&goal.symbols(), RELEVANT_K),
        },
        budget_exhausted: exhausted,
        stats: stats(start),
    }
}


#[cfg(test)]
mod group_tests {
    use super::*;
    use crate::infer::check_verdict;
    use crate::logic::{parse_atom, parse_program};

    use std::time::Duration;

    const GROUP_AXIOMS: &str = "\
product(identity,?X,?X) :- element(?X).
product(?X,identity,?X) :- element(?X).
product(?X,?V,?W) :- product(?X,?Y,?U), product(?Y,?Z,?V), product(?U,?Z,?W).
product(?U,?Z,?W) :- product(?X,?Y,?U), product(?Y,?Z,?V), product(?X,?V,?W).
element(identity).
element(a).
element(b).
element(c).
";

    #[test]
    fn exponent_two_group_is_commutative() {
        let mut kb = KnowledgeBase::new();
        for c in parse_program(GROUP_AXIOMS).unwrap() {
            kb.assert_clause(c, None).unwrap();
        }
        let goal = Goal::new(
            parse_program("product(?X,?X,identity) :- element(?X).\nproduct(a,b,c).").unwrap(),
            vec![parse_atom("product(b,a,c)").unwrap()],
        );
        let limits = Limits {
            max_depth: 8,
            ..Limits::default()
        };
        for guide in [true, false] {
            let t = Instant::now();
            let v = prove_inner(&goal, &kb, &limits, guide);
            assert!(t.elapsed() < Duration::from_secs(10));
            assert_eq!(v.kind(), "proved", "guide {guide}");
            let Outcome::Proved { proofs } = &v.outcome else { unreachable!() };
            assert!(proofs[0].depth() <= 8);
            check_verdict(&v, &goal, &kb).unwrap();
        }
    }
}
