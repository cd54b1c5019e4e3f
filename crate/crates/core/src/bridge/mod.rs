//! Bridge between T2Math sentences and clauses.
//!
//! Before matching, every math span of a sentence is replaced by a decimal
//! literal (1000 for the first span, 1001 for the second, ...). A rule's
//! pattern is matched against the substituted text; captured literals are
//! mapped back through the [`SpanMap`] to `var_` identifiers and pasted into
//! the rule's clause template at `#{n}`. `?{n}` pastes the same capture as a
//! universally quantified variable instead.
//!
//! Rules may carry span subpatterns that look inside a captured span, for
//! example `(\w+)\*(\w+)=(\w+)` applied to `x*x=e`. Their groups continue
//! the `#{n}` numbering after the top-level slots.

mod pattern;
mod rules;
mod translate;

use thiserror::Error;

use crate::logic::LogicError;
use crate::t2math::T2MathError;

pub use pattern::{compile_pattern, Matcher};
pub use rules::{PatternRule, ReverseRecord, RuleRecord, RuleSection, RuleSet};
pub use translate::{
    apply_forward, apply_reverse, apply_reverse_with, nearest_rules, substitute_spans, validate_rule, var_name_of, Candidate,
    ExampleOutcome, ExampleStatus, SpanEntry, SpanMap, TranslationResult, ValidationReport,
};

/// First substitution literal.
pub const SPAN_BASE: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BridgeError {
    #[error("E_PATTERN_UNSUPPORTED: {construct} at byte {offset} in pattern `{pattern}`")]
    PatternUnsupported {
        pattern: String,
        offset: usize,
        construct: String,
    },
    #[error("E_TEMPLATE_SYNTAX: rule `{rule_id}` produced `{text}`: {error}")]
    TemplateSyntax {
        rule_id: String,
        text: String,
        error: LogicError,
    },
    #[error("E_EXAMPLE_NO_MATCH: example `{example}` does not match rule `{rule_id}`")]
    ExampleNoMatch { rule_id: String, example: String },
    #[error("E_EDIT_TIME_AMBIGUITY: example `{example}` of rule `{rule_id}` is also read by rule `{clashing_rule}` with a different result")]
    EditTimeAmbiguity {
        rule_id: String,
        example: String,
        clashing_rule: String,
    },
    #[error("E_INVALID_RULE: rule `{rule_id}`: {message}")]
    InvalidRule { rule_id: String, message: String },
    #[error("E_DUPLICATE_RULE: rule id `{rule_id}` already registered")]
    DuplicateRule { rule_id: String },
    #[error(transparent)]
    Sentence(#[from] T2MathError),
}

impl BridgeError {
    pub fn code(&self) -> &'static str {
        match self {
            BridgeError::PatternUnsupported { .. } => "E_PATTERN_UNSUPPORTED",
            BridgeError::TemplateSyntax { .. } => "E_TEMPLATE_SYNTAX",
            BridgeError::ExampleNoMatch { .. } => "E_EXAMPLE_NO_MATCH",
            BridgeError::EditTimeAmbiguity { .. } => "E_EDIT_TIME_AMBIGUITY",
            BridgeError::InvalidRule { .. } => "E_INVALID_RULE",
            BridgeError::DuplicateRule { .. } => "E_DUPLICATE_RULE",
            BridgeError::Sentence(e) => e.code(),
        }
    }
}
