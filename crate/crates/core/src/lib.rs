//! Core of a semantic mathematics wiki.
//!
//! Propositions are written in T2Math, a small controlled language with
//! `Let` / `Suppose that` / `Prove that` sections and `$...$` math spans.
//! Bridge rules translate each sentence into frame-logic clauses, which are
//! checked against a versioned knowledge base by a built-in Horn prover, or
//! exported as TPTP problems for external provers.
//!
//! Module map:
//!
//! - [`t2math`]: tokenizer and section parser for propositions.
//! - [`logic`]: terms, atoms, clauses, the textual clause syntax and the
//!   shared symbol registry.
//! - [`bridge`]: pattern rules with integer span substitution, forward and
//!   reverse translation, edit-time validation.
//! - [`kb`]: clause store, literature pages, relevance search and the
//!   content-addressed revision log.
//! - [`infer`]: goal normalization, backward chaining with iterative
//!   deepening, constraint checking by forward chaining, proof outlines.
//! - [`tptp`]: FOF export with axiom selection and a validator for the
//!   emitted subset.

pub mod bridge;
pub mod infer;
pub mod kb;
pub mod logic;
pub mod t2math;
pub mod tptp;
