use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// A degree of membership, always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MembershipGrade(f64);

impl MembershipGrade {
    pub const ZERO: MembershipGrade = MembershipGrade(0.0);
    pub const ONE: MembershipGrade = MembershipGrade(1.0);

    pub fn new(value: f64) -> Result<Self, FuzzyError> {
        if (0.0..=1.0).contains(&value) {
            Ok(MembershipGrade(value))
        } else {
            Err(FuzzyError::GradeOutOfRange(value))
        }
    }

    /// Saturates into `[0, 1]`. NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            MembershipGrade(0.0)
        } else {
            MembershipGrade(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl TryFrom<f64> for MembershipGrade {
    type Error = FuzzyError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        MembershipGrade::new(value)
    }
}

impl From<MembershipGrade> for f64 {
    fn from(grade: MembershipGrade) -> f64 {
        grade.0
    }
}

impl fmt::Display for MembershipGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Qualitative value of a linguistic variable.
///
/// The derived ordering (`Poor < Average < Good`) is the tie-break order used
/// by term classification: on equal grades the lower, less-live term wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinguisticTerm {
    Poor,
    Average,
    Good,
}

impl LinguisticTerm {
    pub const ALL: [LinguisticTerm; 3] = [
        LinguisticTerm::Poor,
        LinguisticTerm::Average,
        LinguisticTerm::Good,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinguisticTerm::Poor => "poor",
            LinguisticTerm::Average => "average",
            LinguisticTerm::Good => "good",
        }
    }
}

impl fmt::Display for LinguisticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinguisticTerm {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "poor" => Ok(LinguisticTerm::Poor),
            "average" => Ok(LinguisticTerm::Average),
            "good" => Ok(LinguisticTerm::Good),
            _ => Err(FuzzyError::UnknownTerm(s.to_string())),
        }
    }
}

/// Trapezoidal membership function with corners `a <= b <= c <= d`.
///
/// Grade is 0 outside `[a, d]`, 1 on `[b, c]` and linear on the two ramps.
/// Degenerate ramps (`a == b` or `c == d`) give crisp shoulders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct TrapezoidalMF {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TrapezoidalMF {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || !(a <= b && b <= c && c <= d) {
            return Err(FuzzyError::InvalidTrapezoid([a, b, c, d]));
        }
        Ok(TrapezoidalMF { a, b, c, d })
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Closed support `[a, d]`.
    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }

    pub fn eval(&self, x: f64) -> MembershipGrade {
        MembershipGrade::saturating(self.raw_eval(x))
    }

    fn raw_eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x >= self.b && x <= self.c {
            1.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    /// The set of points with a strictly positive grade, as
    /// `(start, start_closed, end, end_closed)`.
    pub(crate) fn positive_interval(&self) -> (f64, bool, f64, bool) {
        (self.a, self.a == self.b, self.d, self.c == self.d)
    }
}

impl TryFrom<[f64; 4]> for TrapezoidalMF {
    type Error = FuzzyError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        TrapezoidalMF::new(v[0], v[1], v[2], v[3])
    }
}

impl From<TrapezoidalMF> for [f64; 4] {
    fn from(mf: TrapezoidalMF) -> [f64; 4] {
        mf.corners()
    }
}

/// `c / (n - 1)`: share of consecutive frame pairs that showed movement.
pub fn fuzzify_movement(c: u32, n: u32) -> Result<MembershipGrade, FuzzyError> {
    if n < 2 {
        return Err(FuzzyError::InvalidFrameCount(n));
    }
    if c > n - 1 {
        return Err(FuzzyError::InvalidCounter { c, n });
    }
    Ok(MembershipGrade::saturating(f64::from(c) / f64::from(n - 1)))
}

/// Quality grade from the homogeneity count: 1 up to 256, `256 / psi` above.
pub fn fuzzify_quality(psi: f64) -> Result<MembershipGrade, FuzzyError> {
    if psi.is_nan() || psi < 0.0 {
        return Err(FuzzyError::InvalidHomogeneity(psi));
    }
    if psi <= 256.0 {
        Ok(MembershipGrade::ONE)
    } else {
        Ok(MembershipGrade::saturating(256.0 / psi))
    }
}
