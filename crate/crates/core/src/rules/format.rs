use std::fmt::Write;

use super::ast::{Antecedent, Rule, RuleBase};

fn write_expr(out: &mut String, expr: &Antecedent) {
    match expr {
        Antecedent::Leaf(c) => {
            let _ = write!(out, "{c}");
        }
        Antecedent::Node { op, left, right, .. } => {
            // left nesting is the parser's default grouping; right nesting needs parentheses
            write_expr(out, left);
            let _ = write!(out, " {} ", op.keyword());
            if matches!(**right, Antecedent::Node { .. }) {
                out.push('(');
                write_expr(out, right);
                out.push(')');
            } else {
                write_expr(out, right);
            }
        }
    }
}

pub fn format_rule(rule: &Rule) -> String {
    let mut out = String::from("IF ");
    write_expr(&mut out, &rule.antecedent);
    let _ = write!(out, " THEN {}", rule.consequent);
    out
}

/// Canonical text, one rule per line.
pub fn format_rules(rb: &RuleBase) -> String {
    rb.rules().iter().fold(String::new(), |mut out, rule| {
        out.push_str(&format_rule(rule));
        out.push('\n');
        out
    })
}
