//! Mamdani-style fuzzy inference.
//!
//! Inputs are fuzzified twice: a formula grade (movement ratio `c / (n - 1)`,
//! quality `256 / psi`) and a linguistic label from the variable's trapezoids.
//! Rules compose leaves with AND = `min` and OR = `max`; fired rules clip their
//! output term, the clipped sets are unioned and the curve is reduced to a
//! crisp value by its center of gravity.

mod inference;
mod membership;
mod variable;

use thiserror::Error;

pub use inference::{
    aggregate, defuzzify_cog, evaluate_rule, fire_rules, leaf_grade, sample_grid, AggregatedOutput,
    InferenceMode, InputMap, RuleActivation,
};
pub use membership::{fuzzify_movement, fuzzify_quality, LinguisticTerm, MembershipGrade, TrapezoidalMF};
pub use variable::{
    classify_term, default_variables, FuzzifiedInput, LinguisticVariable, VariableSet, EYE, MOUTH,
    OUTPUT, QUALITY,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("membership grade {0} is outside [0, 1]")]
    GradeOutOfRange(f64),
    #[error("trapezoid corners {0:?} are not ordered a <= b <= c <= d")]
    InvalidTrapezoid([f64; 4]),
    #[error("variable `{name}` has an invalid domain [{lo}, {hi}]")]
    InvalidDomain { name: String, lo: f64, hi: f64 },
    #[error("term `{term}` of variable `{name}` extends outside its domain")]
    SupportOutsideDomain { name: String, term: LinguisticTerm },
    #[error("variable `{name}` has no term with a positive grade at {at}")]
    DeadZone { name: String, at: f64 },
    #[error("frame count {0} is below 2")]
    InvalidFrameCount(u32),
    #[error("movement counter {c} exceeds n - 1 for n = {n}")]
    InvalidCounter { c: u32, n: u32 },
    #[error("homogeneity {0} is negative")]
    InvalidHomogeneity(f64),
    #[error("value {x} is outside the domain of `{name}`")]
    OutOfDomain { name: String, x: f64 },
    #[error("unknown linguistic term `{0}`")]
    UnknownTerm(String),
    #[error("rule references unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("sample step {0} must be positive")]
    InvalidStep(f64),
    #[error("aggregated output curve is malformed")]
    MalformedCurve,
    #[error("no rule produced a positive activation")]
    NoActivation,
}
