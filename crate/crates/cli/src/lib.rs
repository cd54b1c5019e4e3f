//! The `semwiki` command line. [`run`] is the whole program; `main` only
//! wires it to the process streams.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use semwiki_core::bridge::{validate_rule, PatternRule, RuleRecord, TranslationResult};
use semwiki_core::infer::{
    check_verdict, normalize_with_choices, prove, render_verdict, translate_all, Goal, Outcome, Verdict,
};
use semwiki_core::kb::{Bundle, KnowledgeBase};
use semwiki_core::logic::parse_program;
use semwiki_core::t2math::{parse, Proposition};
use semwiki_core::tptp::{export_axioms, export_problem};
use semwiki_yard::Config;
use serde_json::{json, Value};

pub const EXIT_PROVED: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "semwiki", version, about = "Semantic mathematics wiki engine")]
struct Cli {
    /// Print machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Configuration file; defaults to $T2KU_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Store directory; overrides the configuration.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ReadingArgs {
    /// Candidate for an ambiguous sentence, as SENTENCE=CANDIDATE.
    #[arg(long = "choose", value_parser = parse_choice)]
    choices: Vec<(usize, usize)>,
}

#[derive(Args, Debug, Default)]
struct LimitArgs {
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long)]
    step_budget: Option<u64>,
    /// Seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the parsed proposition.
    Parse { file: PathBuf },
    /// Print the clauses read from each sentence.
    Translate {
        file: PathBuf,
        #[command(flatten)]
        reading: ReadingArgs,
    },
    /// Prove a proposition against the store.
    Prove {
        file: PathBuf,
        #[command(flatten)]
        reading: ReadingArgs,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Write a first-order problem file for external provers.
    ExportTptp {
        file: PathBuf,
        #[arg(long)]
        tptp_out: Option<PathBuf>,
        #[command(flatten)]
        reading: ReadingArgs,
    },
    /// Manage bridge rules.
    Rule {
        #[command(subcommand)]
        action: RuleAction,
    },
    /// Move store contents in or out.
    Kb {
        #[command(subcommand)]
        action: KbAction,
    },
    /// Run the problem service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Subcommand, Debug)]
enum RuleAction {
    /// Validate and store the rules in a JSON file.
    Add { file: PathBuf },
    /// Validate without storing.
    Check { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum KbAction {
    /// Load a bundle (`.json`) or clause program (any other extension).
    Import { path: PathBuf },
    /// Write a bundle (`.json`), TPTP axioms (`.p`, `.ax`, `.tptp`) or a
    /// clause program.
    Export { path: PathBuf },
}

fn parse_choice(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('=').ok_or("expected SENTENCE=CANDIDATE")?;
    let a = a.trim().parse().map_err(|_| format!("bad sentence index `{a}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad candidate index `{b}`"))?;
    Ok((a, b))
}

/// A failed command: exit status, error code and message, and anything
/// worth printing alongside.
#[derive(Debug)]
struct Failure {
    status: i32,
    code: String,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn usage(code: &str, message: impl Into<String>) -> Failure {
        Failure {
            status: EXIT_USAGE,
            code: code.into(),
            message: message.into(),
            detail: None,
        }
    }

    fn data(code: &str, message: impl Into<String>) -> Failure {
        Failure {
            status: EXIT_DATA,
            code: code.into(),
            message: message.into(),
            detail: None,
        }
    }

    fn with_detail(mut self, detail: Value) -> Failure {
        self.detail = Some(detail);
        self
    }
}

macro_rules! data_err {
    ($e:expr) => {{
        let e = $e;
        Failure::data(e.code(), e.to_string())
    }};
}

struct Ctx<'a> {
    json: bool,
    config: Config,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, value: &Value, text: &str) {
        if self.json {
            let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(value).expect("json"));
        } else if !text.is_empty() {
            let _ = write!(self.out, "{text}");
            if !text.ends_with('\n') {
                let _ = writeln!(self.out);
            }
        }
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
    }

    fn data_dir(&self) -> &Path {
        &self.config.data_dir
    }

    fn load_kb(&self) -> Result<KnowledgeBase, Failure> {
        let dir = self.data_dir();
        if dir.join("revlog").exists() {
            KnowledgeBase::load(dir).map_err(|e| data_err!(e))
        } else {
            Ok(KnowledgeBase::new())
        }
    }

    fn save_kb(&self, kb: &mut KnowledgeBase, message: &str) -> Result<(), Failure> {
        if kb.pending().is_empty() {
            return Ok(());
        }
        kb.commit_now("semwiki", message).map_err(|e| data_err!(e))?;
        kb.save(self.data_dir()).map_err(|e| data_err!(e))
    }
}

/// Runs the program with `args` (including the program name) and returns
/// the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut config = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    if let Some(dir) = cli.data_dir {
        config.data_dir = dir;
    }
    let mut ctx = Ctx {
        json: cli.json,
        config,
        out,
        err,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.message);
            if let Some(d) = &f.detail {
                if !ctx.json {
                    let _ = writeln!(ctx.err, "{}", serde_json::to_string_pretty(d).expect("json"));
                }
            }
            if ctx.json {
                let v = json!({ "error": { "code": f.code, "message": f.message, "detail": f.detail } });
                let _ = writeln!(ctx.out, "{}", serde_json::to_string_pretty(&v).expect("json"));
            }
            f.status
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<i32, Failure> {
    match command {
        Command::Parse { file } => {
            let prop = read_proposition(&file)?;
            let v = json!(prop);
            // the proposition is JSON either way
            let text = serde_json::to_string_pretty(&v).expect("json");
            ctx.emit(&v, &text);
            Ok(0)
        }
        Command::Translate { file, .. } => translate(ctx, &file),
        Command::Prove { file, reading, limits } => prove_file(ctx, &file, &reading, &limits),
        Command::ExportTptp { file, tptp_out, reading } => export_tptp(ctx, &file, tptp_out.as_deref(), &reading),
        Command::Rule { action } => match action {
            RuleAction::Add { file } => rules(ctx, &file, true),
            RuleAction::Check { file } => rules(ctx, &file, false),
        },
        Command::Kb { action } => match action {
            KbAction::Import { path } => kb_import(ctx, &path),
            KbAction::Export { path } => kb_export(ctx, &path),
        },
        Command::Serve { port } => {
            if let Some(p) = port {
                ctx.config.port = p;
            }
            serve(ctx.config.clone())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage("E_IO", format!("cannot read {}: {e}", path.display())))
}

fn read_proposition(path: &Path) -> Result<Proposition, Failure> {
    parse(&read_text(path)?).map_err(|e| Failure::usage(e.code(), e.to_string()))
}

fn translate(ctx: &mut Ctx, file: &Path) -> Result<i32, Failure> {
    let prop = read_proposition(file)?;
    let kb = ctx.load_kb()?;
    let readings = translate_all(&prop, kb.rules()).map_err(|e| data_err!(e))?;
    let mut text = String::new();
    let mut untranslated = Vec::new();
    for r in &readings {
        text.push_str(&format!("[{}] {:?}: {}\n", r.index, r.section, r.sentence));
        match &r.result {
            TranslationResult::Translated { clauses, rule_id, .. } => {
                for c in clauses {
                    text.push_str(&format!("    {c}    ({rule_id})\n"));
                }
            }
            TranslationResult::Ambiguous { candidates, .. } => {
                text.push_str("    ambiguous:\n");
                for (i, c) in candidates.iter().enumerate() {
                    let cs: Vec<String> = c.clauses.iter().map(|c| c.to_string()).collect();
                    text.push_str(&format!("      {i}: {}    ({})\n", cs.join(" "), c.rule_id));
                }
            }
            TranslationResult::Unparsed { .. } => {
                text.push_str("    no rule matches\n");
                untranslated.push(r.index);
            }
        }
    }
    ctx.emit(&json!(readings), &text);
    if untranslated.is_empty() {
        Ok(0)
    } else {
        Err(Failure::data(
            "E_UNTRANSLATED",
            format!("no rule reads sentence(s) {untranslated:?}"),
        ))
    }
}

fn goal_for(file: &Path, reading: &ReadingArgs, kb: &KnowledgeBase) -> Result<Goal, Failure> {
    let prop = read_proposition(file)?;
    let choices: BTreeMap<usize, usize> = reading.choices.iter().copied().collect();
    normalize_with_choices(&prop, kb.rules(), kb, &choices).map_err(|e| data_err!(e))
}

fn exit_for(v: &Verdict) -> i32 {
    match v.outcome {
        Outcome::Proved { .. } => EXIT_PROVED,
        Outcome::Unknown { .. } => EXIT_UNKNOWN,
        Outcome::Inconsistent { .. } => EXIT_INCONSISTENT,
    }
}

fn prove_file(ctx: &mut Ctx, file: &Path, reading: &ReadingArgs, limits: &LimitArgs) -> Result<i32, Failure> {
    let kb = ctx.load_kb()?;
    let goal = goal_for(file, reading, &kb)?;
    let mut l = ctx.config.limits;
    if let Some(d) = limits.max_depth {
        l.max_depth = d;
    }
    if let Some(s) = limits.step_budget {
        l.step_budget = s;
    }
    if let Some(t) = limits.time_budget {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::usage("E_INVALID_LIMITS", "time budget must be positive"));
        }
        l.time_budget = Duration::from_secs_f64(t);
    }
    l.validate().map_err(|e| Failure::usage(e.code(), e.to_string()))?;
    let verdict = prove(&goal, &kb, &l);
    // a verdict that fails its own check is a bug, not an answer
    check_verdict(&verdict, &goal, &kb).map_err(|e| data_err!(e))?;
    let outline = render_verdict(&verdict, kb.rules(), &goal, &kb);
    let mut text = format!("{}\n", verdict.kind());
    if verdict.budget_exhausted {
        text.push_str("(budget exhausted)\n");
    }
    text.push_str(&outline);
    ctx.emit(&json!({ "verdict": verdict, "outline": outline }), &text);
    Ok(exit_for(&verdict))
}

fn export_tptp(ctx: &mut Ctx, file: &Path, out: Option<&Path>, reading: &ReadingArgs) -> Result<i32, Failure> {
    let kb = ctx.load_kb()?;
    let goal = goal_for(file, reading, &kb)?;
    let doc = export_problem(&goal, &kb, &ctx.config.selection).map_err(|e| data_err!(e))?;
    match out {
        Some(p) => {
            std::fs::write(p, &doc).map_err(|e| Failure::data("E_IO", format!("cannot write {}: {e}", p.display())))?;
            ctx.emit(&json!({ "written": p }), "");
            ctx.note(&format!("wrote {}", p.display()));
        }
        None => ctx.emit(&json!({ "tptp": doc }), &doc),
    }
    Ok(0)
}

/// A rule file holds one record or a list of them.
fn read_rules(path: &Path) -> Result<Vec<RuleRecord>, Failure> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::data("E_INVALID_RULE", e.to_string()))?;
    let parsed = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|r| vec![r])
    };
    parsed.map_err(|e| Failure::data("E_INVALID_RULE", e.to_string()))
}

fn rules(ctx: &mut Ctx, file: &Path, store: bool) -> Result<i32, Failure> {
    let records = read_rules(file)?;
    let mut kb = ctx.load_kb()?;
    let mut reports = Vec::new();
    let mut text = String::new();
    for record in records {
        let rule = PatternRule::compile(record.clone()).map_err(|e| data_err!(e))?;
        let report = validate_rule(kb.rules(), &rule).map_err(|e| data_err!(e))?;
        text.push_str(&format!("{}: {}\n", record.id, if report.is_ok() { "ok" } else { "rejected" }));
        reports.push(json!(report));
        if let Err(e) = report.into_result() {
            return Err(data_err!(e).with_detail(json!(reports)));
        }
        // later rules in the file are checked against earlier ones
        kb.add_rule(record).map_err(|e| data_err!(e))?;
    }
    if store {
        ctx.save_kb(&mut kb, &format!("add rules from {}", file.display()))?;
    }
    ctx.emit(&json!(reports), &text);
    Ok(0)
}

fn kb_import(ctx: &mut Ctx, path: &Path) -> Result<i32, Failure> {
    let text = read_text(path)?;
    let mut kb = ctx.load_kb()?;
    let before = kb.len();
    if path.extension().is_some_and(|e| e == "json") {
        let bundle: Bundle = serde_json::from_str(&text).map_err(|e| Failure::data("E_INVALID", e.to_string()))?;
        kb.import_bundle(bundle).map_err(|e| data_err!(e))?;
    } else {
        let clauses = parse_program(&text).map_err(|e| Failure::usage(e.code(), e.to_string()))?;
        let source = path.file_name().map(|n| n.to_string_lossy().into_owned());
        for c in clauses {
            kb.assert_clause(c, source.clone()).map_err(|e| data_err!(e))?;
        }
    }
    let added = kb.len() - before;
    ctx.save_kb(&mut kb, &format!("import {}", path.display()))?;
    ctx.emit(
        &json!({ "added": added, "clauses": kb.len(), "revision": kb.head_revision() }),
        &format!("imported {added} clause(s); store holds {}\n", kb.len()),
    );
    Ok(0)
}

fn kb_export(ctx: &mut Ctx, path: &Path) -> Result<i32, Failure> {
    let kb = ctx.load_kb()?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let text = match ext {
        "json" => serde_json::to_string_pretty(&kb.export_bundle()).expect("bundle serializes"),
        "p" | "ax" | "tptp" => export_axioms(&kb),
        _ => kb.clauses().map(|c| format!("{c}\n")).collect(),
    };
    std::fs::write(path, text).map_err(|e| Failure::data("E_IO", format!("cannot write {}: {e}", path.display())))?;
    ctx.emit(
        &json!({ "written": path, "clauses": kb.len() }),
        &format!("wrote {} clause(s) to {}\n", kb.len(), path.display()),
    );
    Ok(0)
}

fn serve(config: Config) -> Result<i32, Failure> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .try_init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::data("E_IO", e.to_string()))?;
    rt.block_on(semwiki_yard::serve(config))
        .map_err(|e| Failure::data("E_SERVE", e.to_string()))?;
    Ok(0)
}
