use std::path::{Path, PathBuf};
use std::process::Command;

use semwiki_cli::run;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

struct Out {
    status: i32,
    stdout: String,
    stderr: String,
}

fn semwiki(data: &Path, args: &[&str]) -> Out {
    let mut argv = vec!["semwiki".to_string(), "--data-dir".into(), data.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = run(argv, &mut out, &mut err);
    Out {
        status,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A store holding the fixture rules and group axioms.
fn seeded() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let r = semwiki(dir.path(), &["rule", "add", p(&fixture("rules.json"))]);
    assert_eq!(r.status, 0, "{}", r.stderr);
    let r = semwiki(dir.path(), &["kb", "import", p(&fixture("group_axioms.kbt"))]);
    assert_eq!(r.status, 0, "{}", r.stderr);
    dir
}

#[test]
fn exponent_two_problem_is_proved_with_outline() {
    let dir = seeded();
    let r = semwiki(dir.path(), &["prove", p(&fixture("exponent2.t2m"))]);
    assert_eq!(r.status, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("proved\n"));
    assert!(r.stdout.lines().last().unwrap().contains("$b*a=c$"));
}

#[test]
fn verdicts_map_to_exit_statuses() {
    let dir = seeded();
    assert_eq!(semwiki(dir.path(), &["prove", p(&fixture("group.t2m"))]).status, 1);
    let r = semwiki(dir.path(), &["prove", p(&fixture("ambiguous.t2m"))]);
    assert_eq!(r.status, 65);
    assert!(r.stderr.contains("E_UNRESOLVED_AMBIGUITY"));
    let r = semwiki(dir.path(), &["prove", p(&fixture("ambiguous.t2m")), "--choose", "1=0"]);
    assert_eq!(r.status, 1, "{}", r.stderr);

    // a hypothesis clashing with a constraint makes the problem inconsistent
    let src = dir.path().join("clash.kbt");
    std::fs::write(&src, "falsum :- product(?X,?Y,?Z), element(?Z).\n").unwrap();
    assert_eq!(semwiki(dir.path(), &["kb", "import", p(&src)]).status, 0);
    assert_eq!(semwiki(dir.path(), &["prove", p(&fixture("exponent2.t2m"))]).status, 2);
}

#[test]
fn missing_conclusion_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.t2m");
    std::fs::write(&bad, "Let $G$ be a group.\n").unwrap();
    let r = semwiki(dir.path(), &["parse", p(&bad)]);
    assert_eq!(r.status, 64);
    assert!(r.stderr.contains("E_NO_CONCLUSION"), "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let r = semwiki(dir.path(), &["parse", p(&fixture("group.t2m"))]);
    assert_eq!(r.status, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["declarations"].as_array().unwrap().len(), 3);
    assert_eq!(semwiki(dir.path(), &["parse", "/no/such/file"]).status, 64);
    assert_eq!(semwiki(dir.path(), &["frobnicate"]).status, 64);
    assert_eq!(semwiki(dir.path(), &["--help"]).status, 0);
}

#[test]
fn clashing_rule_is_reported() {
    let dir = seeded();
    let dup = dir.path().join("dup.json");
    std::fs::write(
        &dup,
        r#"{"id": "eqrel_again", "section": "declaration",
            "pattern": "\\d+ be an equivalence relation on \\d+",
            "template": "equiv(#{1}, #{2}).",
            "examples": ["Let $\\sim$ be an equivalence relation on $S$"]}"#,
    )
    .unwrap();
    let r = semwiki(dir.path(), &["rule", "check", p(&dup)]);
    assert_eq!(r.status, 65);
    assert!(r.stderr.contains("E_EDIT_TIME_AMBIGUITY"), "{}", r.stderr);
    assert!(r.stderr.contains("eqrel_decl"), "{}", r.stderr);

    let r = semwiki(dir.path(), &["--json", "rule", "check", p(&dup)]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["error"]["code"], "E_EDIT_TIME_AMBIGUITY");
    assert_eq!(v["error"]["detail"][0]["rule_id"], "eqrel_again");

    // check never stores, add refuses
    assert_eq!(semwiki(dir.path(), &["rule", "add", p(&dup)]).status, 65);
    let t = semwiki(dir.path(), &["translate", p(&fixture("group.t2m"))]);
    assert_eq!(t.status, 0);
}

#[test]
fn json_mode_prints_only_json() {
    let dir = seeded();
    for args in [
        vec!["--json", "prove", p(&fixture("exponent2.t2m"))],
        vec!["--json", "translate", p(&fixture("ambiguous.t2m"))],
        vec!["--json", "export-tptp", p(&fixture("exponent2.t2m"))],
        vec!["--json", "prove", p(&fixture("ambiguous.t2m"))],
    ] {
        let r = semwiki(dir.path(), &args);
        let v: Value = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout));
        assert!(v.is_object() || v.is_array());
    }
    let r = semwiki(dir.path(), &["--json", "prove", p(&fixture("exponent2.t2m"))]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "proved");
    assert!(v["outline"].as_str().unwrap().contains("$b*a=c$"));
}

#[test]
fn tptp_export_and_store_round_trip() {
    let dir = seeded();
    let out = dir.path().join("problem.p");
    let r = semwiki(dir.path(), &["export-tptp", p(&fixture("exponent2.t2m")), "--tptp-out", p(&out)]);
    assert_eq!(r.status, 0, "{}", r.stderr);
    let doc = std::fs::read_to_string(&out).unwrap();
    semwiki_core::tptp::validate_fof(&doc).unwrap();
    assert!(doc.contains(", conjecture, "));

    for ext in ["json", "kbt", "p"] {
        let path = dir.path().join(format!("kb.{ext}"));
        assert_eq!(semwiki(dir.path(), &["kb", "export", p(&path)]).status, 0);
        assert!(std::fs::metadata(&path).unwrap().len() > 0);
    }
    semwiki_core::tptp::validate_fof(&std::fs::read_to_string(dir.path().join("kb.p")).unwrap()).unwrap();

    // a fresh store fed the bundle proves the same problem once it has rules
    let fresh = tempfile::tempdir().unwrap();
    assert_eq!(semwiki(fresh.path(), &["rule", "add", p(&fixture("rules.json"))]).status, 0);
    let r = semwiki(fresh.path(), &["kb", "import", p(&dir.path().join("kb.json"))]);
    assert_eq!(r.status, 0, "{}", r.stderr);
    assert_eq!(semwiki(fresh.path(), &["prove", p(&fixture("exponent2.t2m"))]).status, 0);
}

#[test]
fn configuration_file_and_flags() {
    let dir = seeded();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"limits": {"max_depth": 1, "step_budget": 100000, "time_budget": 5, "term_depth": 2}}"#).unwrap();
    let bin = env!("CARGO_BIN_EXE_semwiki");
    let prove = |extra: &[&str], env: Option<&Path>| {
        let mut c = Command::new(bin);
        c.args(["--data-dir", p(dir.path()), "prove", p(&fixture("exponent2.t2m"))]).args(extra);
        c.env_remove("T2KU_CONFIG");
        if let Some(e) = env {
            c.env("T2KU_CONFIG", e);
        }
        c.output().unwrap().status.code().unwrap()
    };
    assert_eq!(prove(&[], None), 0);
    // the file named by the environment is read
    assert_eq!(prove(&[], Some(&cfg)), 1);
    // flags override the file
    assert_eq!(prove(&["--max-depth", "8"], Some(&cfg)), 0);
    assert_eq!(prove(&["--max-depth", "0"], None), 64);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let r = semwiki(dir.path(), &["--config", p(&broken), "parse", p(&fixture("group.t2m"))]);
    assert_eq!(r.status, 64);
    assert!(r.stderr.contains("E_CONFIG"));
}
