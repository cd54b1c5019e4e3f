//! The problem and task store as a synchronous state machine. Every
//! operation takes the current time explicitly; callers serialize access.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::RngCore;
use semwiki_core::bridge::{
    apply_reverse, nearest_rules, validate_rule, BridgeError, PatternRule, RuleRecord, TranslationResult,
    ValidationReport,
};
use semwiki_core::infer::{
    check_verdict, normalize, normalize_with_choices, render_verdict, translate_all, Goal, InferError, Outcome,
    ProofError, Stats, Verdict,
};
use semwiki_core::kb::{Bundle, KbError, KnowledgeBase};
use semwiki_core::logic::{ClauseId, SymbolHit};
use semwiki_core::t2math::{parse, T2MathError};
use semwiki_core::tptp::{export_axioms, export_problem, TptpError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;

#[derive(Debug, Error)]
pub enum YardError {
    #[error("E_PARSE: {0}")]
    Parse(T2MathError),
    #[error("E_UNTRANSLATED: {} sentence(s) match no rule", sentences.len())]
    Untranslated { sentences: Vec<UntranslatedSentence> },
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error("E_BAD_CHOICE: {0}")]
    BadChoice(String),
    #[error("E_WRONG_STATE: problem `{id}` is {state:?}")]
    WrongState { id: String, state: ProblemState },
    #[error("E_NOT_FOUND: no {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error("E_AUTH: unknown engine or wrong token")]
    Auth,
    #[error("E_NO_LEASE: engine `{engine}` never held task `{task}`")]
    NoLease { engine: String, task: String },
    #[error(transparent)]
    BadProof(#[from] ProofError),
    #[error("{code}: rule `{rule_id}` rejected")]
    RuleRejected {
        code: &'static str,
        rule_id: String,
        report: ValidationReport,
    },
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Tptp(#[from] TptpError),
    #[error("E_INVALID: {0}")]
    Invalid(String),
}

impl YardError {
    pub fn code(&self) -> &'static str {
        match self {
            YardError::Parse(_) => "E_PARSE",
            YardError::Untranslated { .. } => "E_UNTRANSLATED",
            YardError::Infer(e) => e.code(),
            YardError::BadChoice(_) => "E_BAD_CHOICE",
            YardError::WrongState { .. } => "E_WRONG_STATE",
            YardError::NotFound { .. } => "E_NOT_FOUND",
            YardError::Auth => "E_AUTH",
            YardError::NoLease { .. } => "E_NO_LEASE",
            YardError::BadProof(_) => "E_BAD_PROOF",
            YardError::RuleRejected { code, .. } => code,
            YardError::Bridge(e) => e.code(),
            YardError::Kb(e) => e.code(),
            YardError::Tptp(e) => e.code(),
            YardError::Invalid(_) => "E_INVALID",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemState {
    NeedsDisambiguation,
    Pending,
    Dispatched,
    Resolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Native,
    Tptp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UntranslatedSentence {
    pub index: usize,
    pub sentence: String,
    pub nearest_rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateView {
    pub rule_id: String,
    pub clauses: Vec<String>,
    /// Each clause read back as a sentence.
    pub text: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ambiguity {
    pub sentence_index: usize,
    pub sentence: String,
    pub candidates: Vec<CandidateView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemRecord {
    pub id: String,
    pub source: String,
    pub state: ProblemState,
    pub choices: BTreeMap<usize, usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ambiguities: Vec<Ambiguity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<Goal>,
    #[serde(rename = "final")]
    pub final_verdict: Option<Verdict>,
    pub created_at: i64,
    /// When tasks were queued; the global timeout runs from here.
    pub queued_at: Option<i64>,
    pub resolved_at: Option<i64>,
    pub tasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineRecord {
    pub id: String,
    pub name: String,
    #[serde(skip)]
    pub token: String,
    pub capabilities: BTreeSet<Capability>,
    pub last_seen: i64,
    pub local: bool,
    /// No poll for three lease periods.
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lease {
    pub engine_id: String,
    pub expires_at: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmitStatus {
    Accepted,
    Supplementary,
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskResult {
    pub engine_id: String,
    pub verdict: Verdict,
    pub received_at: i64,
    pub status: SubmitStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub id: String,
    pub problem_id: String,
    pub payload_kind: Capability,
    pub leases: Vec<Lease>,
    /// Every engine that ever held a lease.
    pub leased_to: BTreeSet<String>,
    pub results: Vec<TaskResult>,
    #[serde(skip)]
    tptp: Option<String>,
}

impl Task {
    fn live_lease(&self, engine: &str, now: i64) -> bool {
        self.leases.iter().any(|l| l.engine_id == engine && l.expires_at > now)
    }

    fn answered_by(&self, engine: &str) -> bool {
        self.results.iter().any(|r| r.engine_id == engine)
    }
}

/// What an engine receives from a poll.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPayload {
    pub task_id: String,
    pub problem_id: String,
    pub kind: Capability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Goal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<semwiki_core::infer::Limits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tptp: Option<String>,
    pub lease_expires_at: i64,
}

/// Housekeeping performed by [`Yard::resolve_stalled`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    LeaseExpired { task: String, engine: String },
    Requeued { task: String },
    EngineStale { engine: String },
    TimedOut { problem: String },
    ResolvedUnknown { problem: String },
}

/// A problem with its outline rendered, as served over HTTP.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemView<'a> {
    #[serde(flatten)]
    pub record: &'a ProblemRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outline: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Native,
    Tptp,
}

pub struct Yard {
    config: Config,
    kb: KnowledgeBase,
    /// Store directory written after rule changes, if any.
    store: Option<PathBuf>,
    problems: Vec<ProblemRecord>,
    engines: Vec<EngineRecord>,
    tasks: Vec<Task>,
    token_index: HashMap<String, usize>,
}

fn index_of(id: &str, prefix: char, len: usize) -> Option<usize> {
    let n: usize = id.strip_prefix(prefix)?.parse().ok()?;
    (1..=len).contains(&n).then(|| n - 1)
}

impl Yard {
    pub fn new(config: Config, kb: KnowledgeBase) -> Yard {
        Yard {
            config,
            kb,
            store: None,
            problems: Vec::new(),
            engines: Vec::new(),
            tasks: Vec::new(),
            token_index: HashMap::new(),
        }
    }

    /// Saves the knowledge base to `dir` whenever it changes.
    pub fn with_store(mut self, dir: PathBuf) -> Yard {
        self.store = Some(dir);
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn problems(&self) -> &[ProblemRecord] {
        &self.problems
    }

    pub fn engines(&self) -> &[EngineRecord] {
        &self.engines
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn problem(&self, id: &str) -> Option<&ProblemRecord> {
        index_of(id, 'p', self.problems.len()).map(|i| &self.problems[i])
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        index_of(id, 't', self.tasks.len()).map(|i| &self.tasks[i])
    }

    pub fn engine(&self, id: &str) -> Option<&EngineRecord> {
        index_of(id, 'e', self.engines.len()).map(|i| &self.engines[i])
    }

    fn problem_index(&self, id: &str) -> Result<usize, YardError> {
        index_of(id, 'p', self.problems.len()).ok_or_else(|| YardError::NotFound {
            kind: "problem",
            id: id.to_string(),
        })
    }

    pub fn problem_view(&self, id: &str) -> Result<ProblemView<'_>, YardError> {
        let record = &self.problems[self.problem_index(id)?];
        let outline = match (&record.final_verdict, &record.goal) {
            (Some(v), Some(goal)) => Some(render_verdict(v, self.kb.rules(), goal, &self.kb)),
            _ => None,
        };
        Ok(ProblemView { record, outline })
    }

    // -----------------------------------------------------------------
    // problems

    /// Parses and translates `source`. Ambiguous sentences park the
    /// problem until [`Yard::disambiguate`]; otherwise its tasks are
    /// queued at once.
    pub fn create_problem(&mut self, source: &str, now: i64) -> Result<&ProblemRecord, YardError> {
        let prop = parse(source).map_err(YardError::Parse)?;
        let rules = self.kb.rules();
        let sentences: Vec<_> = prop.sentences().collect();
        let mut untranslated = Vec::new();
        let mut ambiguities = Vec::new();
        for r in translate_all(&prop, rules)? {
            match &r.result {
                TranslationResult::Unparsed { sentence } => untranslated.push(UntranslatedSentence {
                    index: r.index,
                    sentence: sentence.clone(),
                    nearest_rules: nearest_rules(rules, sentences[r.index], 3),
                }),
                TranslationResult::Ambiguous { candidates, span_map } => ambiguities.push(Ambiguity {
                    sentence_index: r.index,
                    sentence: r.sentence.clone(),
                    candidates: candidates
                        .iter()
                        .map(|c| CandidateView {
                            rule_id: c.rule_id.clone(),
                            clauses: c.clauses.iter().map(|x| x.to_string()).collect(),
                            text: c.clauses.iter().map(|x| apply_reverse(rules, x, span_map)).collect(),
                        })
                        .collect(),
                }),
                TranslationResult::Translated { .. } => {}
            }
        }
        if !untranslated.is_empty() {
            return Err(YardError::Untranslated {
                sentences: untranslated,
            });
        }
        let goal = if ambiguities.is_empty() {
            Some(normalize(&prop, rules, &self.kb)?)
        } else {
            None
        };
        let id = format!("p{}", self.problems.len() + 1);
        self.problems.push(ProblemRecord {
            id,
            source: source.to_string(),
            state: ProblemState::NeedsDisambiguation,
            choices: BTreeMap::new(),
            ambiguities,
            goal: None,
            final_verdict: None,
            created_at: now,
            queued_at: None,
            resolved_at: None,
            tasks: Vec::new(),
        });
        let pi = self.problems.len() - 1;
        if let Some(goal) = goal {
            self.enqueue(pi, goal, now)?;
        }
        Ok(&self.problems[pi])
    }

    /// Fixes the reading of every ambiguous sentence and queues the
    /// problem.
    pub fn disambiguate(
        &mut self,
        id: &str,
        choices: BTreeMap<usize, usize>,
        now: i64,
    ) -> Result<&ProblemRecord, YardError> {
        let pi = self.problem_index(id)?;
        let p = &self.problems[pi];
        if p.state != ProblemState::NeedsDisambiguation {
            return Err(YardError::WrongState {
                id: id.to_string(),
                state: p.state,
            });
        }
        for a in &p.ambiguities {
            match choices.get(&a.sentence_index) {
                None => {
                    return Err(YardError::BadChoice(format!(
                        "sentence {} needs a choice",
                        a.sentence_index
                    )))
                }
                Some(&c) if c >= a.candidates.len() => {
                    return Err(YardError::BadChoice(format!(
                        "sentence {} has {} candidates, got {c}",
                        a.sentence_index,
                        a.candidates.len()
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = choices.keys().find(|k| !p.ambiguities.iter().any(|a| a.sentence_index == **k)) {
            return Err(YardError::BadChoice(format!("sentence {extra} is not ambiguous")));
        }
        let prop = parse(&p.source).map_err(YardError::Parse)?;
        let goal = normalize_with_choices(&prop, self.kb.rules(), &self.kb, &choices)?;
        self.problems[pi].choices = choices;
        self.enqueue(pi, goal, now)?;
        Ok(&self.problems[pi])
    }

    fn enqueue(&mut self, pi: usize, goal: Goal, now: i64) -> Result<(), YardError> {
        let tptp = export_problem(&goal, &self.kb, &self.config.selection)?;
        let pid = self.problems[pi].id.clone();
        for (kind, doc) in [(Capability::Native, None), (Capability::Tptp, Some(tptp))] {
            let id = format!("t{}", self.tasks.len() + 1);
            self.tasks.push(Task {
                id: id.clone(),
                problem_id: pid.clone(),
                payload_kind: kind,
                leases: Vec::new(),
                leased_to: BTreeSet::new(),
                results: Vec::new(),
                tptp: doc,
            });
            self.problems[pi].tasks.push(id);
        }
        let p = &mut self.problems[pi];
        p.goal = Some(goal);
        p.queued_at = Some(now);
        p.state = ProblemState::Pending;
        Ok(())
    }

    // -----------------------------------------------------------------
    // engines

    pub fn register_engine(
        &mut self,
        name: &str,
        capabilities: BTreeSet<Capability>,
        local: bool,
        now: i64,
    ) -> Result<(String, String), YardError> {
        if capabilities.is_empty() {
            return Err(YardError::Invalid("an engine needs at least one capability".into()));
        }
        let id = format!("e{}", self.engines.len() + 1);
        let mut bytes = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut bytes);
        let token = hex::encode(bytes);
        self.token_index.insert(token.clone(), self.engines.len());
        self.engines.push(EngineRecord {
            id: id.clone(),
            name: name.to_string(),
            token: token.clone(),
            capabilities,
            last_seen: now,
            local,
            stale: false,
        });
        Ok((id, token))
    }

    fn auth(&self, engine_id: &str, token: &str) -> Result<usize, YardError> {
        match self.token_index.get(token) {
            Some(&i) if self.engines[i].id == engine_id => Ok(i),
            _ => Err(YardError::Auth),
        }
    }

    /// Engine id owning `token`.
    pub fn engine_for_token(&self, token: &str) -> Option<&str> {
        self.token_index.get(token).map(|&i| self.engines[i].id.as_str())
    }

    /// Heartbeat and work request. A stale engine's poll only revives it;
    /// it is offered work from its next poll on.
    pub fn poll_task(&mut self, engine_id: &str, token: &str, now: i64) -> Result<Option<TaskPayload>, YardError> {
        let ei = self.auth(engine_id, token)?;
        let engine = &mut self.engines[ei];
        let was_stale = engine.stale;
        engine.last_seen = now;
        engine.stale = false;
        if was_stale {
            return Ok(None);
        }
        let engine = &self.engines[ei];
        let problems = &self.problems;
        let pick = self.tasks.iter().position(|t| {
            let p = &problems[index_of(&t.problem_id, 'p', problems.len()).expect("task of a known problem")];
            p.state != ProblemState::Resolved
                && engine.capabilities.contains(&t.payload_kind)
                && !t.live_lease(&engine.id, now)
                && !t.answered_by(&engine.id)
        });
        let Some(ti) = pick else { return Ok(None) };
        let expires_at = now + self.config.lease_ms();
        let engine_id = engine.id.clone();
        let task = &mut self.tasks[ti];
        task.leases.retain(|l| l.engine_id != engine_id);
        task.leases.push(Lease {
            engine_id: engine_id.clone(),
            expires_at,
        });
        task.leased_to.insert(engine_id);
        let pi = index_of(&task.problem_id, 'p', self.problems.len()).expect("known problem");
        let problem = &mut self.problems[pi];
        if problem.state == ProblemState::Pending {
            problem.state = ProblemState::Dispatched;
        }
        let native = task.payload_kind == Capability::Native;
        Ok(Some(TaskPayload {
            task_id: task.id.clone(),
            problem_id: task.problem_id.clone(),
            kind: task.payload_kind,
            goal: native.then(|| problem.goal.clone()).flatten(),
            limits: native.then_some(self.config.limits),
            tptp: task.tptp.clone(),
            lease_expires_at: expires_at,
        }))
    }

    /// Records an engine's verdict. Conclusive verdicts are checked
    /// against the goal first; the first valid one resolves the problem.
    pub fn submit_result(
        &mut self,
        engine_id: &str,
        token: &str,
        task_id: &str,
        verdict: Verdict,
        now: i64,
    ) -> Result<SubmitStatus, YardError> {
        self.auth(engine_id, token)?;
        let ti = index_of(task_id, 't', self.tasks.len()).ok_or_else(|| YardError::NotFound {
            kind: "task",
            id: task_id.to_string(),
        })?;
        let task = &self.tasks[ti];
        if !task.leased_to.contains(engine_id) {
            return Err(YardError::NoLease {
                engine: engine_id.to_string(),
                task: task_id.to_string(),
            });
        }
        if task.results.iter().any(|r| r.engine_id == engine_id && r.verdict == verdict) {
            return Ok(SubmitStatus::Ignored);
        }
        let pi = index_of(&task.problem_id, 'p', self.problems.len()).expect("known problem");
        let goal = self.problems[pi].goal.as_ref().expect("queued problems have a goal");
        if verdict.is_conclusive() {
            check_verdict(&verdict, goal, &self.kb)?;
        }
        let resolved = self.problems[pi].state == ProblemState::Resolved;
        let status = if resolved {
            SubmitStatus::Supplementary
        } else {
            SubmitStatus::Accepted
        };
        let task = &mut self.tasks[ti];
        task.leases.retain(|l| l.engine_id != engine_id);
        task.results.push(TaskResult {
            engine_id: engine_id.to_string(),
            verdict: verdict.clone(),
            received_at: now,
            status,
        });
        if !resolved {
            if verdict.is_conclusive() {
                self.resolve(pi, verdict, now);
            } else {
                self.try_early_unknown(pi, now);
            }
        }
        Ok(status)
    }

    fn resolve(&mut self, pi: usize, verdict: Verdict, now: i64) {
        let p = &mut self.problems[pi];
        debug_assert!(p.final_verdict.is_none(), "a problem resolves once");
        p.final_verdict = Some(verdict);
        p.state = ProblemState::Resolved;
        p.resolved_at = Some(now);
        for tid in &p.tasks {
            let ti = index_of(tid, 't', self.tasks.len()).expect("known task");
            self.tasks[ti].leases.clear();
        }
        tracing::info!(problem = %p.id, "resolved");
    }

    fn problem_tasks(&self, pi: usize) -> impl Iterator<Item = &Task> {
        self.problems[pi]
            .tasks
            .iter()
            .map(|id| &self.tasks[index_of(id, 't', self.tasks.len()).expect("known task")])
    }

    /// Unknown from every result so far: relevant facts ranked by their
    /// best position in any list, then by id.
    fn merged_unknown(&self, pi: usize, timed_out: bool) -> Verdict {
        let mut best: BTreeMap<ClauseId, usize> = BTreeMap::new();
        let mut exhausted = timed_out;
        let mut stats = Stats::default();
        for t in self.problem_tasks(pi) {
            for r in &t.results {
                if let Outcome::Unknown { relevant } = &r.verdict.outcome {
                    for (pos, id) in relevant.iter().enumerate() {
                        let e = best.entry(*id).or_insert(pos);
                        *e = (*e).min(pos);
                    }
                    exhausted |= r.verdict.budget_exhausted;
                    stats.depth_reached = stats.depth_reached.max(r.verdict.stats.depth_reached);
                    stats.steps += r.verdict.stats.steps;
                    stats.millis = stats.millis.max(r.verdict.stats.millis);
                }
            }
        }
        let mut ranked: Vec<(usize, ClauseId)> = best.into_iter().map(|(id, pos)| (pos, id)).collect();
        ranked.sort();
        Verdict {
            outcome: Outcome::Unknown {
                relevant: ranked.into_iter().map(|(_, id)| id).collect(),
            },
            budget_exhausted: exhausted,
            stats,
        }
    }

    /// Resolves as Unknown once every live engine able to work on the
    /// problem has answered and no lease is outstanding.
    fn try_early_unknown(&mut self, pi: usize, now: i64) -> bool {
        if self.problems[pi].state == ProblemState::Resolved {
            return false;
        }
        let tasks: Vec<&Task> = self.problem_tasks(pi).collect();
        if tasks.iter().all(|t| t.results.is_empty()) || tasks.iter().any(|t| t.leases.iter().any(|l| l.expires_at > now)) {
            return false;
        }
        let settled = self.engines.iter().filter(|e| !e.stale).all(|e| {
            tasks
                .iter()
                .filter(|t| e.capabilities.contains(&t.payload_kind))
                .all(|t| t.answered_by(&e.id))
        });
        if settled {
            let v = self.merged_unknown(pi, false);
            self.resolve(pi, v, now);
        }
        settled
    }

    /// Expires leases, marks silent engines stale and times out old
    /// problems.
    pub fn resolve_stalled(&mut self, now: i64) -> Vec<Action> {
        let mut actions = Vec::new();
        let stale_after = 3 * self.config.lease_ms();
        for e in &mut self.engines {
            if !e.stale && now - e.last_seen >= stale_after {
                e.stale = true;
                actions.push(Action::EngineStale { engine: e.id.clone() });
            }
        }
        let stale: BTreeSet<&str> = self.engines.iter().filter(|e| e.stale).map(|e| e.id.as_str()).collect();
        for t in &mut self.tasks {
            let before = t.leases.len();
            let mut expired = Vec::new();
            t.leases.retain(|l| {
                let keep = l.expires_at > now && !stale.contains(l.engine_id.as_str());
                if !keep {
                    expired.push(l.engine_id.clone());
                }
                keep
            });
            for engine in expired {
                actions.push(Action::LeaseExpired {
                    task: t.id.clone(),
                    engine,
                });
            }
            if before > 0 && t.leases.is_empty() {
                actions.push(Action::Requeued { task: t.id.clone() });
            }
        }
        let timeout = self.config.global_timeout_ms();
        for pi in 0..self.problems.len() {
            let p = &self.problems[pi];
            if !matches!(p.state, ProblemState::Pending | ProblemState::Dispatched) {
                continue;
            }
            if p.queued_at.is_some_and(|q| now - q >= timeout) {
                let v = self.merged_unknown(pi, true);
                actions.push(Action::TimedOut { problem: p.id.clone() });
                self.resolve(pi, v, now);
            } else if self.try_early_unknown(pi, now) {
                actions.push(Action::ResolvedUnknown {
                    problem: self.problems[pi].id.clone(),
                });
            }
        }
        actions
    }

    // -----------------------------------------------------------------
    // knowledge base

    /// Validates and stores a bridge rule. The report is returned either
    /// way; a failing report is an error.
    pub fn add_rule(&mut self, record: RuleRecord, now: i64) -> Result<ValidationReport, YardError> {
        let rule = PatternRule::compile(record.clone())?;
        let report = validate_rule(self.kb.rules(), &rule)?;
        if let Err(e) = report.clone().into_result() {
            return Err(YardError::RuleRejected {
                code: e.code(),
                rule_id: record.id,
                report,
            });
        }
        let mut kb = self.kb.clone();
        kb.add_rule(record.clone())?;
        kb.commit("yard", &format!("add rule {}", record.id), now)?;
        if let Some(dir) = &self.store {
            kb.save(dir)?;
        }
        self.kb = kb;
        Ok(report)
    }

    pub fn export_kb(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Native => {
                let bundle: Bundle = self.kb.export_bundle();
                serde_json::to_string_pretty(&bundle).expect("bundle serializes")
            }
            ExportFormat::Tptp => export_axioms(&self.kb),
        }
    }

    pub fn search_symbols(&self, query: &str, limit: usize) -> Vec<SymbolHit> {
        self.kb.registry().search(query, limit)
    }
}
