use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::membership::{LinguisticTerm, MembershipGrade};
use super::variable::{FuzzifiedInput, LinguisticVariable};
use super::FuzzyError;
use crate::rules::{Antecedent, Condition, Connective, Rule, RuleBase};

/// Fuzzified inputs keyed by variable name.
pub type InputMap = BTreeMap<String, FuzzifiedInput>;

/// How rule antecedents are gated and graded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InferenceMode {
    /// A rule fires only when every leaf term equals the classified label of
    /// its variable; leaves contribute the variable's formula grade.
    #[default]
    PaperHybrid,
    /// Leaves contribute the trapezoid grade of their term at the input
    /// value; no label gate.
    StandardMamdani,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleActivation {
    pub rule_id: usize,
    pub output_term: LinguisticTerm,
    pub level: MembershipGrade,
}

fn compose(node: &Antecedent, leaf: &impl Fn(&Condition) -> MembershipGrade) -> MembershipGrade {
    match node {
        Antecedent::Leaf(cond) => leaf(cond),
        Antecedent::Node { op, left, right, .. } => {
            let l = compose(left, leaf);
            let r = compose(right, leaf);
            match op {
                Connective::And => l.min(r),
                Connective::Or => l.max(r),
            }
        }
    }
}

/// The grade a leaf `variable IS term` contributes under `mode`.
pub fn leaf_grade(input: &FuzzifiedInput, term: LinguisticTerm, mode: InferenceMode) -> MembershipGrade {
    match mode {
        InferenceMode::PaperHybrid => input.grade,
        InferenceMode::StandardMamdani => input.term_grades[term.index()],
    }
}

/// Evaluates one rule against the fuzzified inputs.
///
/// AND is `min`, OR is `max`, grouped as parsed (left-associative unless
/// parenthesized). Returns `None` when the rule does not fire.
pub fn evaluate_rule(
    rule: &Rule,
    inputs: &InputMap,
    mode: InferenceMode,
) -> Result<Option<RuleActivation>, FuzzyError> {
    let mut leaves = Vec::new();
    rule.antecedent.collect_leaves(&mut leaves);
    for cond in &leaves {
        if !inputs.contains_key(&cond.variable) {
            return Err(FuzzyError::UnknownVariable(cond.variable.clone()));
        }
    }
    let activation = |level| RuleActivation {
        rule_id: rule.id,
        output_term: rule.consequent.term,
        level,
    };
    match mode {
        InferenceMode::PaperHybrid => {
            let all_match = leaves
                .iter()
                .all(|cond| inputs[&cond.variable].label == cond.term);
            if !all_match {
                return Ok(None);
            }
            let level = compose(&rule.antecedent, &|cond| {
                leaf_grade(&inputs[&cond.variable], cond.term, mode)
            });
            Ok(Some(activation(level)))
        }
        InferenceMode::StandardMamdani => {
            let level = compose(&rule.antecedent, &|cond| {
                leaf_grade(&inputs[&cond.variable], cond.term, mode)
            });
            if level.value() > 0.0 {
                Ok(Some(activation(level)))
            } else {
                Ok(None)
            }
        }
    }
}

/// Evaluates every rule of the base, keeping the ones that fire, in rule order.
pub fn fire_rules(
    rules: &RuleBase,
    inputs: &InputMap,
    mode: InferenceMode,
) -> Result<Vec<RuleActivation>, FuzzyError> {
    let mut fired = Vec::new();
    for rule in rules.rules() {
        if let Some(act) = evaluate_rule(rule, inputs, mode)? {
            fired.push(act);
        }
    }
    Ok(fired)
}

/// The aggregated output membership curve, sampled over the output domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedOutput {
    base: (f64, f64),
    samples: Vec<(f64, f64)>,
}

impl AggregatedOutput {
    /// Validates a hand-built curve: strictly increasing `x` from `base.0`
    /// to `base.1`, every grade in `[0, 1]`.
    pub fn new(base: (f64, f64), samples: Vec<(f64, f64)>) -> Result<Self, FuzzyError> {
        let ordered = samples.windows(2).all(|w| w[0].0 < w[1].0);
        let graded = samples.iter().all(|(_, mu)| (0.0..=1.0).contains(mu));
        let anchored = samples.first().map(|s| s.0) == Some(base.0)
            && samples.last().map(|s| s.0) == Some(base.1);
        if samples.len() < 2 || !ordered || !graded || !anchored {
            return Err(FuzzyError::MalformedCurve);
        }
        Ok(AggregatedOutput { base, samples })
    }

    pub fn base(&self) -> (f64, f64) {
        self.base
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }
}

/// Sample positions covering `[lo, hi]` with spacing at most `step`; both
/// endpoints included.
pub fn sample_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, FuzzyError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FuzzyError::InvalidStep(step));
    }
    let span = hi - lo;
    let intervals = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=intervals)
        .map(|i| {
            if i == intervals {
                hi
            } else {
                lo + span * (i as f64) / (intervals as f64)
            }
        })
        .collect())
}

/// Clip-then-union aggregation: at each sample `x`, the max over activations
/// of `min(level, term_mf(x))`.
pub fn aggregate(
    activations: &[RuleActivation],
    output: &LinguisticVariable,
    step: f64,
) -> Result<AggregatedOutput, FuzzyError> {
    let (lo, hi) = output.domain();
    let grid = sample_grid(lo, hi, step)?;
    let samples = grid
        .into_iter()
        .map(|x| {
            let mu = activations
                .iter()
                .map(|act| act.level.min(output.term(act.output_term).eval(x)).value())
                .fold(0.0, f64::max);
            (x, mu)
        })
        .collect();
    Ok(AggregatedOutput {
        base: (lo, hi),
        samples,
    })
}

/// Center of gravity over the stored samples.
pub fn defuzzify_cog(agg: &AggregatedOutput) -> Result<f64, FuzzyError> {
    let (mass, moment) = agg
        .samples
        .iter()
        .fold((0.0, 0.0), |(m, mx), &(x, mu)| (m + mu, mx + mu * x));
    if mass <= 0.0 {
        return Err(FuzzyError::NoActivation);
    }
    Ok((moment / mass).clamp(agg.base.0, agg.base.1))
}
