use serde::{Deserialize, Serialize};

use super::membership::{LinguisticTerm, MembershipGrade, TrapezoidalMF};
use super::FuzzyError;

pub const EYE: &str = "eye";
pub const MOUTH: &str = "mouth";
pub const QUALITY: &str = "quality";
pub const OUTPUT: &str = "output";

/// A named quantity with Poor / Average / Good trapezoids over a closed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VariableDef", into = "VariableDef")]
pub struct LinguisticVariable {
    name: String,
    domain: (f64, f64),
    terms: [TrapezoidalMF; 3],
}

/// Serialized shape of a variable, as it appears in configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDef {
    name: String,
    domain: [f64; 2],
    poor: TrapezoidalMF,
    average: TrapezoidalMF,
    good: TrapezoidalMF,
}

impl TryFrom<VariableDef> for LinguisticVariable {
    type Error = FuzzyError;

    fn try_from(def: VariableDef) -> Result<Self, Self::Error> {
        LinguisticVariable::new(
            def.name,
            (def.domain[0], def.domain[1]),
            [def.poor, def.average, def.good],
        )
    }
}

impl From<LinguisticVariable> for VariableDef {
    fn from(v: LinguisticVariable) -> Self {
        VariableDef {
            name: v.name,
            domain: [v.domain.0, v.domain.1],
            poor: v.terms[0],
            average: v.terms[1],
            good: v.terms[2],
        }
    }
}

impl LinguisticVariable {
    /// `terms` is indexed by [`LinguisticTerm::index`].
    pub fn new(
        name: impl Into<String>,
        domain: (f64, f64),
        terms: [TrapezoidalMF; 3],
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidDomain { name, lo, hi });
        }
        for (term, mf) in LinguisticTerm::ALL.iter().zip(terms.iter()) {
            let (a, d) = mf.support();
            if a < lo || d > hi {
                return Err(FuzzyError::SupportOutsideDomain { name, term: *term });
            }
        }
        if let Some(x) = first_dead_point(&terms, lo, hi) {
            return Err(FuzzyError::DeadZone { name, at: x });
        }
        Ok(LinguisticVariable {
            name,
            domain,
            terms,
        })
    }

    /// Builds trapezoids from one closed interval per term.
    ///
    /// Intervals are ordered along the axis and each adjacent pair is joined
    /// by a linear ramp: across the overlap when they overlap, across the gap
    /// when they do not. When two intervals only share an endpoint, the shared
    /// point goes to the upper interval and the lower term ramps down over the
    /// preceding `touch_width` units. The outer ends become crisp shoulders.
    pub fn from_intervals(
        name: impl Into<String>,
        intervals: [(LinguisticTerm, f64, f64); 3],
        touch_width: f64,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let mut sorted = intervals;
        sorted.sort_by(|x, y| x.1.total_cmp(&y.1));
        let mut corners = [[0.0f64; 4]; 3];
        for (i, (_, lo, hi)) in sorted.iter().enumerate() {
            corners[i] = [*lo, *lo, *hi, *hi];
        }
        for i in 0..2 {
            let upper_start = sorted[i + 1].1;
            let lower_end = sorted[i].2;
            let (ramp_lo, ramp_hi) = if lower_end == upper_start {
                (lower_end - touch_width, lower_end)
            } else {
                (lower_end.min(upper_start), lower_end.max(upper_start))
            };
            corners[i][2] = ramp_lo;
            corners[i][3] = ramp_hi;
            if lower_end != upper_start {
                corners[i + 1][0] = ramp_lo;
                corners[i + 1][1] = ramp_hi;
            }
        }
        let mut terms = [TrapezoidalMF::new(0.0, 0.0, 0.0, 0.0)?; 3];
        for (i, (term, _, _)) in sorted.iter().enumerate() {
            let [a, b, c, d] = corners[i];
            terms[term.index()] = TrapezoidalMF::new(a, b, c, d)?;
        }
        let domain = (sorted[0].1, sorted[2].2);
        LinguisticVariable::new(name, domain, terms)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn term(&self, term: LinguisticTerm) -> &TrapezoidalMF {
        &self.terms[term.index()]
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    /// Clamps `x` into the domain.
    pub fn saturate(&self, x: f64) -> f64 {
        x.clamp(self.domain.0, self.domain.1)
    }

    pub fn grades(&self, x: f64) -> [MembershipGrade; 3] {
        [
            self.terms[0].eval(x),
            self.terms[1].eval(x),
            self.terms[2].eval(x),
        ]
    }

    /// Term with the highest grade at `x`; ties go to the lower term.
    pub fn classify(&self, x: f64) -> Result<LinguisticTerm, FuzzyError> {
        if !self.contains(x) {
            return Err(FuzzyError::OutOfDomain {
                name: self.name.clone(),
                x,
            });
        }
        let grades = self.grades(x);
        let mut best = LinguisticTerm::Poor;
        for term in LinguisticTerm::ALL {
            if grades[term.index()] > grades[best.index()] {
                best = term;
            }
        }
        Ok(best)
    }

    /// Fuzzifies one observation. `value` is classified against the term
    /// trapezoids; `grade` is the formula grade carried into rule composition.
    pub fn fuzzify(&self, value: f64, grade: MembershipGrade) -> Result<FuzzifiedInput, FuzzyError> {
        let label = self.classify(value)?;
        Ok(FuzzifiedInput {
            variable: self.name.clone(),
            value,
            grade,
            label,
            term_grades: self.grades(value),
        })
    }
}

pub fn classify_term(variable: &LinguisticVariable, x: f64) -> Result<LinguisticTerm, FuzzyError> {
    variable.classify(x)
}

fn first_dead_point(terms: &[TrapezoidalMF; 3], lo: f64, hi: f64) -> Option<f64> {
    let mut spans: Vec<_> = terms.iter().map(|t| t.positive_interval()).collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    // covered up to `reach`; `reach_closed` tells whether `reach` itself is covered
    let mut reach = lo;
    let mut reach_closed = false;
    for (start, start_closed, end, end_closed) in spans {
        let connects = start < reach || (start == reach && (reach_closed || start_closed));
        if !connects {
            if reach > hi || (reach == hi && reach_closed) {
                break;
            }
            return Some(reach);
        }
        if end > reach || (end == reach && end_closed) {
            reach = end;
            reach_closed = end_closed;
        }
    }
    if reach > hi || (reach == hi && reach_closed) {
        None
    } else {
        Some(reach)
    }
}

/// One input after fuzzification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzifiedInput {
    pub variable: String,
    /// The value classified against the term trapezoids.
    pub value: f64,
    /// Formula grade (movement ratio or quality grade).
    pub grade: MembershipGrade,
    pub label: LinguisticTerm,
    /// Trapezoid grade of each term at `value`, indexed by [`LinguisticTerm::index`].
    pub term_grades: [MembershipGrade; 3],
}

/// The inputs of the expert system plus its output variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSet {
    pub inputs: Vec<LinguisticVariable>,
    pub output: LinguisticVariable,
}

impl VariableSet {
    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&LinguisticVariable> {
        if self.output.name == name {
            Some(&self.output)
        } else {
            self.input(name)
        }
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|v| v.name()).collect()
    }
}

/// Eye movement, mouth movement, image quality and the liveness output,
/// built from their Poor / Average / Good intervals.
pub fn default_variables() -> VariableSet {
    use LinguisticTerm::*;
    let build = |name: &str, intervals, touch| {
        LinguisticVariable::from_intervals(name, intervals, touch).expect("built-in intervals are valid")
    };
    VariableSet {
        inputs: vec![
            build(EYE, [(Poor, 0.0, 6.0), (Average, 5.0, 11.0), (Good, 10.0, 19.0)], 1.0),
            build(MOUTH, [(Poor, 0.0, 5.0), (Average, 4.0, 10.0), (Good, 10.0, 19.0)], 1.0),
            build(
                QUALITY,
                [(Good, 256.0, 500.0), (Average, 600.0, 800.0), (Poor, 900.0, 1300.0)],
                1.0,
            ),
        ],
        output: build(OUTPUT, [(Poor, 0.0, 0.4), (Average, 0.3, 0.6), (Good, 0.5, 1.0)], 0.01),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LinguisticTerm::*;

    fn corners(v: &LinguisticVariable, t: LinguisticTerm) -> [f64; 4] {
        v.term(t).corners()
    }

    #[test]
    fn default_trapezoids() {
        let vars = default_variables();
        let eye = vars.input(EYE).unwrap();
        assert_eq!(corners(eye, Poor), [0.0, 0.0, 5.0, 6.0]);
        assert_eq!(corners(eye, Average), [5.0, 6.0, 10.0, 11.0]);
        assert_eq!(corners(eye, Good), [10.0, 11.0, 19.0, 19.0]);

        let mouth = vars.input(MOUTH).unwrap();
        assert_eq!(corners(mouth, Poor), [0.0, 0.0, 4.0, 5.0]);
        assert_eq!(corners(mouth, Average), [4.0, 5.0, 9.0, 10.0]);
        assert_eq!(corners(mouth, Good), [10.0, 10.0, 19.0, 19.0]);

        let quality = vars.input(QUALITY).unwrap();
        assert_eq!(corners(quality, Good), [256.0, 256.0, 500.0, 600.0]);
        assert_eq!(corners(quality, Average), [500.0, 600.0, 800.0, 900.0]);
        assert_eq!(corners(quality, Poor), [800.0, 900.0, 1300.0, 1300.0]);

        assert_eq!(corners(&vars.output, Poor), [0.0, 0.0, 0.3, 0.4]);
        assert_eq!(corners(&vars.output, Average), [0.3, 0.4, 0.5, 0.6]);
        assert_eq!(corners(&vars.output, Good), [0.5, 0.6, 1.0, 1.0]);
    }

    #[test]
    fn classification_examples() {
        let vars = default_variables();
        let eye = vars.input(EYE).unwrap();
        assert_eq!(eye.classify(15.0).unwrap(), Good);
        assert_eq!(eye.term(Good).eval(15.0).value(), 1.0);
        assert_eq!(eye.classify(2.0).unwrap(), Poor);
        // ramp crossing: 0.5 / 0.5, lower term wins
        assert_eq!(eye.term(Poor).eval(5.5).value(), 0.5);
        assert_eq!(eye.term(Average).eval(5.5).value(), 0.5);
        assert_eq!(eye.classify(5.5).unwrap(), Poor);

        let mouth = vars.input(MOUTH).unwrap();
        assert_eq!(mouth.classify(10.0).unwrap(), Good);
        assert_eq!(mouth.classify(9.0).unwrap(), Average);

        let quality = vars.input(QUALITY).unwrap();
        assert_eq!(quality.classify(400.0).unwrap(), Good);
        assert_eq!(quality.term(Poor).eval(1300.0).value(), 1.0);
        assert_eq!(quality.classify(1300.0).unwrap(), Poor);

        assert_eq!(vars.output.classify(0.64).unwrap(), Good);
    }

    #[test]
    fn out_of_domain_rejected() {
        let vars = default_variables();
        let eye = vars.input(EYE).unwrap();
        assert!(matches!(eye.classify(19.5), Err(FuzzyError::OutOfDomain { .. })));
        assert!(matches!(eye.classify(-0.1), Err(FuzzyError::OutOfDomain { .. })));
    }

    #[test]
    fn dead_zone_rejected() {
        let t = |a, b, c, d| TrapezoidalMF::new(a, b, c, d).unwrap();
        // Poor and Average meet at 5 with zero grade on both sides
        let err = LinguisticVariable::new(
            "x",
            (0.0, 10.0),
            [t(0.0, 0.0, 4.0, 5.0), t(5.0, 6.0, 7.0, 8.0), t(7.0, 8.0, 10.0, 10.0)],
        )
        .unwrap_err();
        assert!(matches!(err, FuzzyError::DeadZone { at, .. } if at == 5.0));
        // upper end not reached
        let err = LinguisticVariable::new(
            "x",
            (0.0, 10.0),
            [t(0.0, 0.0, 4.0, 5.0), t(4.0, 5.0, 7.0, 8.0), t(7.0, 8.0, 9.0, 10.0)],
        )
        .unwrap_err();
        assert!(matches!(err, FuzzyError::DeadZone { at, .. } if at == 10.0));
    }

    #[test]
    fn support_must_fit_domain() {
        let t = |a, b, c, d| TrapezoidalMF::new(a, b, c, d).unwrap();
        let err = LinguisticVariable::new(
            "x",
            (0.0, 10.0),
            [t(-1.0, 0.0, 4.0, 5.0), t(4.0, 5.0, 7.0, 8.0), t(7.0, 8.0, 10.0, 10.0)],
        )
        .unwrap_err();
        assert!(matches!(err, FuzzyError::SupportOutsideDomain { term: Poor, .. }));
    }

    #[test]
    fn config_shape_round_trips() {
        let vars = default_variables();
        let text = serde_json::to_string(&vars).unwrap();
        let back: VariableSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vars);
    }
}
