//! Randomized interleavings of engines, clock and housekeeping against a
//! single yard. The scheduling rule is re-derived here and compared with
//! every poll.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use semwiki_core::infer::{Goal, Outcome, Stats, Verdict};
use semwiki_core::kb::KnowledgeBase;
use semwiki_core::logic::ClauseId;
use semwiki_yard::state::ProblemRecord;
use semwiki_yard::{Action, Capability, Config, ProblemState, SubmitStatus, Yard};

use crate::rng;

/// Problem sources and, per source, the verdict an honest engine returns
/// and one that must fail checking.
pub struct Scenario {
    pub kb: KnowledgeBase,
    pub sources: Vec<String>,
    pub correct: HashMap<String, Verdict>,
    pub bad: HashMap<String, Verdict>,
}

/// Picks the last candidate of every ambiguous sentence.
pub fn last_candidates(p: &ProblemRecord) -> BTreeMap<usize, usize> {
    p.ambiguities
        .iter()
        .map(|a| (a.sentence_index, a.candidates.len() - 1))
        .collect()
}

/// The goal the yard builds for `source`, settling ambiguity as the
/// simulation does.
pub fn goal_of(kb: &KnowledgeBase, source: &str) -> Goal {
    let mut y = Yard::new(Config::default(), kb.clone());
    let p = y.create_problem(source, 0).unwrap().clone();
    if p.state == ProblemState::NeedsDisambiguation {
        y.disambiguate(&p.id, last_candidates(&p), 0).unwrap();
    }
    y.problem(&p.id).unwrap().goal.clone().unwrap()
}

struct SimEngine {
    id: String,
    token: String,
    caps: Vec<Capability>,
    crashed: bool,
    /// Tasks handed to this engine, in order.
    held: Vec<String>,
    /// Verdicts already sent, for replaying duplicates.
    sent: Vec<(String, Verdict)>,
}

/// Reference scheduling rule: the oldest task of an unresolved problem
/// that the engine can run, holds no live lease on and never answered.
fn expected_poll(y: &Yard, e: &SimEngine, now: i64) -> Option<String> {
    if y.engine(&e.id).unwrap().stale {
        return None;
    }
    y.tasks()
        .iter()
        .find(|t| {
            y.problem(&t.problem_id).unwrap().state != ProblemState::Resolved
                && e.caps.contains(&t.payload_kind)
                && !t.leases.iter().any(|l| l.engine_id == e.id && l.expires_at > now)
                && !t.results.iter().any(|r| r.engine_id == e.id)
        })
        .map(|t| t.id.clone())
}

fn snapshot(y: &Yard) -> String {
    serde_json::to_string(&(y.problems(), y.tasks(), y.engines())).unwrap()
}

fn random_unknown(r: &mut impl Rng) -> Verdict {
    Verdict {
        outcome: Outcome::Unknown {
            relevant: (0..r.gen_range(0..4)).map(|_| ClauseId(r.gen_range(1..8))).collect(),
        },
        budget_exhausted: r.gen_bool(0.3),
        stats: Stats {
            depth_reached: r.gen_range(0..8),
            steps: r.gen_range(0..100),
            millis: r.gen_range(0..100),
        },
    }
}

struct Run<'a> {
    y: Yard,
    now: i64,
    engines: Vec<SimEngine>,
    sources: HashMap<String, String>,
    /// Final verdict and resolution time as first observed.
    finals: HashMap<String, (Verdict, i64)>,
    scenario: &'a Scenario,
    lease: i64,
    timeout: i64,
    seed: u64,
    seen: Coverage,
}

/// How often each scheduling path was taken.
#[derive(Debug, Default, Clone, Copy)]
pub struct Coverage {
    pub accepted: usize,
    pub supplementary: usize,
    pub rejected: usize,
    pub ignored: usize,
    pub requeued: usize,
    pub stale: usize,
    pub timed_out: usize,
}

impl std::ops::AddAssign for Coverage {
    fn add_assign(&mut self, o: Coverage) {
        self.accepted += o.accepted;
        self.supplementary += o.supplementary;
        self.rejected += o.rejected;
        self.ignored += o.ignored;
        self.requeued += o.requeued;
        self.stale += o.stale;
        self.timed_out += o.timed_out;
    }
}

impl Run<'_> {
    fn check_invariants(&mut self) {
        let seed = self.seed;
        for p in self.y.problems() {
            match (&p.final_verdict, self.finals.get(&p.id)) {
                (Some(v), Some((first, at))) => {
                    assert_eq!(v, first, "seed {seed}: {} changed its verdict", p.id);
                    assert_eq!(p.resolved_at, Some(*at), "seed {seed}");
                }
                (Some(v), None) => {
                    assert_eq!(p.state, ProblemState::Resolved);
                    self.finals.insert(p.id.clone(), (v.clone(), p.resolved_at.unwrap()));
                }
                (None, Some(_)) => panic!("seed {seed}: {} lost its verdict", p.id),
                (None, None) => assert_ne!(p.state, ProblemState::Resolved),
            }
            if let (Some(q), Some(r)) = (p.queued_at, p.resolved_at) {
                assert!(r - q <= self.timeout + self.lease, "seed {seed}: {} took {}ms", p.id, r - q);
            }
            if p.state == ProblemState::Resolved {
                for t in &p.tasks {
                    assert!(self.y.task(t).unwrap().leases.is_empty(), "seed {seed}: lease on resolved {t}");
                }
            }
        }
        for t in self.y.tasks() {
            for l in &t.leases {
                assert!(!self.y.engine(&l.engine_id).unwrap().stale, "seed {seed}: stale engine holds {}", t.id);
            }
        }
    }

    fn poll(&mut self, i: usize) {
        let e = &self.engines[i];
        let expected = expected_poll(&self.y, e, self.now);
        let got = self.y.poll_task(&e.id, &e.token, self.now).unwrap().map(|p| p.task_id);
        assert_eq!(got, expected, "seed {}: poll by {}", self.seed, e.id);
        if let Some(t) = got {
            self.engines[i].held.push(t);
        }
    }

    fn submit(&mut self, i: usize, r: &mut impl Rng) {
        let seed = self.seed;
        let e = &self.engines[i];
        let Some(task_id) = e.held.choose(r).cloned() else { return };
        let task = self.y.task(&task_id).unwrap();
        let pid = task.problem_id.clone();
        let source = &self.sources[&pid];
        let before = snapshot(&self.y);
        let was_resolved = self.y.problem(&pid).unwrap().state == ProblemState::Resolved;
        let roll = r.gen_range(0..10);
        if roll == 0 {
            let err = self
                .y
                .submit_result(&e.id, &e.token, &task_id, self.scenario.bad[source].clone(), self.now)
                .unwrap_err();
            assert_eq!(err.code(), "E_BAD_PROOF", "seed {seed}");
            assert_eq!(snapshot(&self.y), before, "seed {seed}: rejected proof changed state");
            self.seen.rejected += 1;
            return;
        }
        if roll == 1 {
            if let Some((t, v)) = e.sent.choose(r).cloned() {
                let status = self.y.submit_result(&e.id, &e.token, &t, v, self.now).unwrap();
                assert_eq!(status, SubmitStatus::Ignored, "seed {seed}");
                assert_eq!(snapshot(&self.y), before, "seed {seed}: duplicate changed state");
                self.seen.ignored += 1;
                return;
            }
        }
        let verdict = if roll < 5 {
            random_unknown(r)
        } else {
            self.scenario.correct[source].clone()
        };
        // an engine sending the same verdict twice is a duplicate, covered above
        if e.sent.iter().any(|(t, v)| *t == task_id && *v == verdict) {
            return;
        }
        let status = self
            .y
            .submit_result(&e.id, &e.token, &task_id, verdict.clone(), self.now)
            .unwrap();
        let expected = if was_resolved {
            self.seen.supplementary += 1;
            SubmitStatus::Supplementary
        } else {
            self.seen.accepted += 1;
            SubmitStatus::Accepted
        };
        assert_eq!(status, expected, "seed {seed}");
        let p = self.y.problem(&pid).unwrap();
        if !was_resolved && verdict.is_conclusive() {
            assert_eq!(p.final_verdict.as_ref(), Some(&verdict), "seed {seed}: first conclusive wins");
            assert_eq!(p.resolved_at, Some(self.now));
        }
        if was_resolved {
            assert_eq!(p.final_verdict.as_ref(), Some(&self.finals[&pid].0), "seed {seed}");
        }
        self.engines[i].sent.push((task_id, verdict));
    }

    fn advance(&mut self, ms: i64) {
        assert!(ms <= self.lease);
        self.now += ms;
        for a in self.y.resolve_stalled(self.now) {
            match a {
                Action::Requeued { .. } => self.seen.requeued += 1,
                Action::EngineStale { .. } => self.seen.stale += 1,
                Action::TimedOut { .. } => self.seen.timed_out += 1,
                _ => {}
            }
        }
        for p in self.y.problems() {
            if let Some(q) = p.queued_at {
                if p.state != ProblemState::Resolved {
                    assert!(self.now - q < self.timeout, "seed {}: {} overdue", self.seed, p.id);
                }
            }
        }
    }

    fn add_problem(&mut self, r: &mut impl Rng) {
        let source = self.scenario.sources.choose(r).unwrap().clone();
        let id = self.y.create_problem(&source, self.now).unwrap().id.clone();
        self.sources.insert(id, source);
    }

    fn disambiguate_some(&mut self, r: &mut impl Rng) {
        let waiting: Vec<String> = self
            .y
            .problems()
            .iter()
            .filter(|p| p.state == ProblemState::NeedsDisambiguation)
            .map(|p| p.id.clone())
            .collect();
        if let Some(id) = waiting.choose(r) {
            let choices = last_candidates(self.y.problem(id).unwrap());
            self.y.disambiguate(id, choices, self.now).unwrap();
        }
    }
}

/// Runs one randomized interleaving and panics on the first broken
/// invariant.
pub fn simulate(seed: u64, scenario: &Scenario) -> Coverage {
    let mut r = rng(seed);
    let mut y = Yard::new(Config::default(), scenario.kb.clone());
    let (lease, timeout) = (y.config().lease_ms(), y.config().global_timeout_ms());
    let caps_list = [
        vec![Capability::Native],
        vec![Capability::Native],
        vec![Capability::Native, Capability::Tptp],
    ];
    let mut engines = Vec::new();
    for (n, c) in caps_list.into_iter().enumerate() {
        let (id, token) = y.register_engine(&format!("sim{n}"), c.iter().copied().collect(), false, 0).unwrap();
        engines.push(SimEngine {
            id,
            token,
            caps: c,
            crashed: false,
            held: Vec::new(),
            sent: Vec::new(),
        });
    }
    let mut run = Run {
        y,
        now: 0,
        engines,
        sources: HashMap::new(),
        finals: HashMap::new(),
        scenario,
        lease,
        timeout,
        seed,
        seen: Coverage::default(),
    };
    run.add_problem(&mut r);
    let mut made = 1;
    let steps = r.gen_range(20..80);
    for _ in 0..steps {
        let i = r.gen_range(0..run.engines.len());
        match r.gen_range(0..20) {
            0..=6 if !run.engines[i].crashed => run.poll(i),
            7..=11 if !run.engines[i].crashed => run.submit(i, &mut r),
            12..=14 => {
                let ms = r.gen_range(1..=lease);
                run.advance(ms);
            }
            15 => run.engines[i].crashed = !run.engines[i].crashed,
            16 if made < 5 => {
                run.add_problem(&mut r);
                made += 1;
            }
            17 => run.disambiguate_some(&mut r),
            _ => {}
        }
        run.check_invariants();
    }

    // drain: everyone recovers and answers honestly
    while run.y.problems().iter().any(|p| p.state == ProblemState::NeedsDisambiguation) {
        run.disambiguate_some(&mut r);
    }
    for e in &mut run.engines {
        e.crashed = false;
    }
    let deadline = run.now + timeout + 2 * lease;
    while run.y.problems().iter().any(|p| p.state != ProblemState::Resolved) {
        assert!(run.now <= deadline, "seed {seed}: not drained");
        for i in 0..run.engines.len() {
            run.poll(i);
            while let Some(t) = run.engines[i].held.pop() {
                let e = &run.engines[i];
                let source = &run.sources[&run.y.task(&t).unwrap().problem_id];
                let v = scenario.correct[source].clone();
                if !e.sent.iter().any(|(st, sv)| *st == t && *sv == v) {
                    run.y.submit_result(&e.id, &e.token, &t, v, run.now).unwrap();
                }
            }
            run.check_invariants();
        }
        run.advance(lease / 2);
        run.check_invariants();
    }
    // honest answers win unless a timeout or an early Unknown got there first
    for p in run.y.problems() {
        let v = p.final_verdict.as_ref().unwrap();
        let expected = scenario.correct[&run.sources[&p.id]].kind();
        if v.kind() != expected {
            assert_eq!(v.kind(), "unknown", "seed {seed}: {} became {}", p.id, v.kind());
        }
    }
    run.seen
}
