use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fuzzy::LinguisticTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn keyword(self) -> &'static str {
        match self {
            Connective::And => "AND",
            Connective::Or => "OR",
        }
    }
}

/// `variable IS term`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub variable: String,
    pub term: LinguisticTerm,
}

impl Condition {
    pub fn new(variable: impl Into<String>, term: LinguisticTerm) -> Self {
        Condition {
            variable: variable.into(),
            term,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} IS {}", self.variable, self.term)
    }
}

/// Antecedent tree. Equality is structural and ignores `parenthesized`,
/// which only records how the source text was written.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub enum Antecedent {
    Leaf(Condition),
    Node {
        op: Connective,
        left: Box<Antecedent>,
        right: Box<Antecedent>,
        parenthesized: bool,
    },
}

impl PartialEq for Antecedent {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Antecedent::Leaf(a), Antecedent::Leaf(b)) => a == b,
            (
                Antecedent::Node { op: o1, left: l1, right: r1, .. },
                Antecedent::Node { op: o2, left: l2, right: r2, .. },
            ) => o1 == o2 && l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

impl Antecedent {
    pub fn leaf(variable: impl Into<String>, term: LinguisticTerm) -> Self {
        Antecedent::Leaf(Condition::new(variable, term))
    }

    pub fn node(op: Connective, left: Antecedent, right: Antecedent) -> Self {
        Antecedent::Node {
            op,
            left: Box::new(left),
            right: Box::new(right),
            parenthesized: false,
        }
    }

    pub fn and(left: Antecedent, right: Antecedent) -> Self {
        Antecedent::node(Connective::And, left, right)
    }

    pub fn or(left: Antecedent, right: Antecedent) -> Self {
        Antecedent::node(Connective::Or, left, right)
    }

    /// Leaves in left-to-right order.
    pub fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Condition>) {
        match self {
            Antecedent::Leaf(c) => out.push(c),
            Antecedent::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn leaves(&self) -> Vec<&Condition> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Antecedent::Leaf(_) => 1,
            Antecedent::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Renders the min/max composition with each leaf replaced by `leaf(cond)`,
    /// e.g. `min(max(0.79, 0.53), 0.64)`.
    pub fn render_composition(&self, leaf: &impl Fn(&Condition) -> String) -> String {
        match self {
            Antecedent::Leaf(c) => leaf(c),
            Antecedent::Node { op, left, right, .. } => {
                let f = match op {
                    Connective::And => "min",
                    Connective::Or => "max",
                };
                format!(
                    "{f}({}, {})",
                    left.render_composition(leaf),
                    right.render_composition(leaf)
                )
            }
        }
    }
}

/// `IF antecedent THEN consequent`, numbered from 1 in listing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    pub antecedent: Antecedent,
    pub consequent: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleBase {
    rules: Vec<Rule>,
    variables: Vec<String>,
}

impl RuleBase {
    /// Renumbers the rules 1..=k in the given order. Structural duplicates are
    /// accepted here; [`crate::rules::validate_rulebase`] reports them.
    pub fn new(rules: impl IntoIterator<Item = (Antecedent, Condition)>) -> Self {
        let rules: Vec<Rule> = rules
            .into_iter()
            .enumerate()
            .map(|(i, (antecedent, consequent))| Rule {
                id: i + 1,
                antecedent,
                consequent,
            })
            .collect();
        let mut variables: Vec<String> = Vec::new();
        for rule in &rules {
            for cond in rule.antecedent.leaves() {
                if !variables.contains(&cond.variable) {
                    variables.push(cond.variable.clone());
                }
            }
        }
        RuleBase { rules, variables }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Antecedent variable names in order of first appearance.
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Rule> {
        id.checked_sub(1).and_then(|i| self.rules.get(i))
    }

    /// Pairs `(earlier, later)` of rule ids with structurally equal antecedents.
    pub fn duplicate_antecedents(&self) -> Vec<(usize, usize)> {
        let mut dups = Vec::new();
        for (j, later) in self.rules.iter().enumerate() {
            if let Some(earlier) = self.rules[..j].iter().find(|r| r.antecedent == later.antecedent) {
                dups.push((earlier.id, later.id));
            }
        }
        dups
    }
}
