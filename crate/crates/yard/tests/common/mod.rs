#![allow(dead_code)]

use std::collections::BTreeSet;

use semwiki_core::bridge::RuleRecord;
use semwiki_core::kb::KnowledgeBase;
use semwiki_core::logic::parse_program;
use semwiki_yard::{Capability, Config, Yard};

pub const RULES: &str = include_str!("../../../../fixtures/rules.json");
pub const GROUP: &str = include_str!("../../../../fixtures/group.t2m");
pub const EXPONENT2: &str = include_str!("../../../../fixtures/exponent2.t2m");
pub const AMBIGUOUS: &str = include_str!("../../../../fixtures/ambiguous.t2m");
pub const AXIOMS: &str = include_str!("../../../../fixtures/group_axioms.kbt");

pub const LEASE: i64 = 30_000;
pub const TIMEOUT: i64 = 120_000;

pub fn fixture_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let records: Vec<RuleRecord> = serde_json::from_str(RULES).unwrap();
    for r in records {
        kb.add_rule(r).unwrap();
    }
    for c in parse_program(AXIOMS).unwrap() {
        kb.assert_clause(c, Some("group axioms".into())).unwrap();
    }
    kb.commit("tests", "fixtures", 0).unwrap();
    kb
}

pub fn yard() -> Yard {
    Yard::new(Config::default(), fixture_kb())
}

pub fn caps(list: &[Capability]) -> BTreeSet<Capability> {
    list.iter().copied().collect()
}
