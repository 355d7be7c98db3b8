//! Textual rule language: parse, pretty-print and validate rule bases.

mod ast;
mod format;
mod parser;
mod validate;

pub use ast::{Antecedent, Condition, Connective, Rule, RuleBase};
pub use format::{format_rule, format_rules};
pub use parser::{
    default_aliases, parse_rules, parse_rules_bytes, ParseError, ParseErrorKind, RuleParser,
};
pub use validate::{all_combinations, validate_rulebase, ValidationReport, VariableRef};

/// The shipped rule base: three core rules plus rules covering further label
/// combinations.
pub const DEFAULT_RULES: &str = include_str!("default.rules");

pub fn default_rulebase() -> RuleBase {
    parse_rules(DEFAULT_RULES).expect("shipped rule base parses")
}
