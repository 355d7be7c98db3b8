use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::ast::RuleBase;
use crate::fuzzy::{LinguisticTerm, VariableSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableRef {
    pub rule_id: usize,
    pub name: String,
}

/// Findings of a rule base check against a variable set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Input names, in the order used by `uncovered` combinations.
    pub inputs: Vec<String>,
    pub unknown_variables: Vec<VariableRef>,
    /// Consequents naming something other than the output variable.
    pub misplaced_consequents: Vec<VariableRef>,
    /// `(earlier, later)` rule ids with structurally equal antecedents.
    pub duplicates: Vec<(usize, usize)>,
    /// Label combinations no rule matches. Informational.
    pub uncovered: Vec<Vec<LinguisticTerm>>,
    pub total_combinations: usize,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        !(self.unknown_variables.is_empty()
            && self.misplaced_consequents.is_empty()
            && self.duplicates.is_empty())
    }
}

/// All label combinations over `n` inputs in lexicographic term order.
pub fn all_combinations(n: usize) -> Vec<Vec<LinguisticTerm>> {
    let mut combos = vec![Vec::new()];
    for _ in 0..n {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                LinguisticTerm::ALL.iter().map(move |t| {
                    let mut next = prefix.clone();
                    next.push(*t);
                    next
                })
            })
            .collect();
    }
    combos
}

pub fn validate_rulebase(rb: &RuleBase, variables: &VariableSet) -> ValidationReport {
    let inputs: Vec<String> = variables.input_names().iter().map(|s| s.to_string()).collect();
    let mut unknown_variables = Vec::new();
    let mut misplaced_consequents = Vec::new();
    let mut covered: BTreeSet<Vec<LinguisticTerm>> = BTreeSet::new();

    for rule in rb.rules() {
        if rule.consequent.variable != variables.output.name() {
            misplaced_consequents.push(VariableRef {
                rule_id: rule.id,
                name: rule.consequent.variable.clone(),
            });
        }
        // Each leaf pins its variable to one term; a rule covers every
        // combination agreeing with its pins, free variables ranging over all terms.
        let mut pins: Vec<Option<LinguisticTerm>> = vec![None; inputs.len()];
        let mut satisfiable = true;
        for cond in rule.antecedent.leaves() {
            match inputs.iter().position(|n| *n == cond.variable) {
                None => {
                    satisfiable = false;
                    let r = VariableRef {
                        rule_id: rule.id,
                        name: cond.variable.clone(),
                    };
                    if !unknown_variables.contains(&r) {
                        unknown_variables.push(r);
                    }
                }
                Some(i) => match pins[i] {
                    Some(t) if t != cond.term => satisfiable = false,
                    _ => pins[i] = Some(cond.term),
                },
            }
        }
        if !satisfiable {
            continue;
        }
        let mut expanded = vec![Vec::new()];
        for pin in &pins {
            let choices: Vec<LinguisticTerm> = match pin {
                Some(t) => vec![*t],
                None => LinguisticTerm::ALL.to_vec(),
            };
            expanded = expanded
                .into_iter()
                .flat_map(|p| {
                    choices.iter().map(move |t| {
                        let mut next = p.clone();
                        next.push(*t);
                        next
                    })
                })
                .collect();
        }
        covered.extend(expanded);
    }

    let all = all_combinations(inputs.len());
    let total_combinations = all.len();
    let uncovered = all.into_iter().filter(|c| !covered.contains(c)).collect();
    ValidationReport {
        inputs,
        unknown_variables,
        misplaced_consequents,
        duplicates: rb.duplicate_antecedents(),
        uncovered,
        total_combinations,
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.unknown_variables {
            writeln!(f, "error: rule {} references unknown variable `{}`", r.rule_id, r.name)?;
        }
        for r in &self.misplaced_consequents {
            writeln!(f, "error: rule {} concludes on `{}`, not the output variable", r.rule_id, r.name)?;
        }
        for (first, second) in &self.duplicates {
            writeln!(f, "error: rule {second} repeats the antecedent of rule {first}")?;
        }
        writeln!(
            f,
            "coverage: {} of {} label combinations matched by no rule",
            self.uncovered.len(),
            self.total_combinations
        )?;
        for combo in &self.uncovered {
            let parts: Vec<String> = self
                .inputs
                .iter()
                .zip(combo)
                .map(|(n, t)| format!("{n}={t}"))
                .collect();
            writeln!(f, "  uncovered: {}", parts.join(" "))?;
        }
        Ok(())
    }
}
