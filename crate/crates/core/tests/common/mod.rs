//! Reference implementations and generators shared by the integration tests.
//! Everything here is written independently of the library internals.

#![allow(dead_code)]

pub mod props;

use fuzzy_liveness::fuzzy::{FuzzifiedInput, LinguisticTerm, LinguisticVariable, MembershipGrade};
use fuzzy_liveness::raster::GrayImage;
use fuzzy_liveness::rules::{Antecedent, Connective, RuleBase};
use rand::Rng;

pub const PAPER_RULES: &str = "\
IF eye movement IS poor AND mouth movement IS poor THEN output IS poor
IF eye movement IS good OR mouth movement IS good AND image quality IS good THEN output IS good
IF eye movement IS good OR mouth movement IS poor AND image quality IS good THEN output IS good
";

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    let px: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
    GrayImage::new(w, h, px).unwrap()
}

/// LBP code of every interior pixel. Neighbor `i` sits at angle `i * 45`
/// degrees, measured counter-clockwise from east with image rows growing down.
pub fn lbp_oracle(img: &GrayImage) -> Vec<u8> {
    let (w, h) = img.dimensions();
    let mut codes = Vec::new();
    for yc in 1..h - 1 {
        for xc in 1..w - 1 {
            let center = i32::from(img.get(xc, yc));
            let mut code = 0u32;
            for i in 0..8u32 {
                let angle = f64::from(i) * std::f64::consts::FRAC_PI_4;
                let dx = angle.cos().round() as i64;
                let dy = -(angle.sin().round() as i64);
                let xp = (i64::from(xc) + dx) as u32;
                let yp = (i64::from(yc) + dy) as u32;
                let s = if i32::from(img.get(xp, yp)) - center >= 0 { 1 } else { 0 };
                code += s * 2u32.pow(i);
            }
            codes.push(code as u8);
        }
    }
    codes
}

pub fn tally(codes: &[u8]) -> Vec<u64> {
    let mut bins = vec![0u64; 256];
    for &c in codes {
        bins[c as usize] += 1;
    }
    bins
}

/// Trapezoid grade straight from the corner definition.
pub fn trapezoid(corners: [f64; 4], x: f64) -> f64 {
    let [a, b, c, d] = corners;
    if x < a || x > d {
        0.0
    } else if x >= b && x <= c {
        1.0
    } else if x < b {
        (x - a) / (b - a)
    } else {
        (d - x) / (d - c)
    }
}

/// Center of gravity of the clipped-union curve by plain summation.
pub fn cog_oracle(activations: &[(LinguisticTerm, f64)], output: &LinguisticVariable, step: f64) -> Option<f64> {
    let (lo, hi) = output.domain();
    let count = ((hi - lo) / step).round() as usize;
    let (mut mass, mut moment) = (0.0, 0.0);
    for i in 0..=count {
        let x = lo + (hi - lo) * i as f64 / count as f64;
        let mu = activations
            .iter()
            .map(|&(t, level)| trapezoid(output.term(t).corners(), x).min(level))
            .fold(0.0, f64::max);
        mass += mu;
        moment += mu * x;
    }
    (mass > 0.0).then(|| moment / mass)
}

/// Recursive min/max evaluation. `hybrid` selects the label-gated formula
/// grade; otherwise the trapezoid grade of each leaf term is used and a zero
/// level means the rule is not fired.
pub fn brute_rule_level(
    antecedent: &Antecedent,
    lookup: &dyn Fn(&str) -> FuzzifiedInput,
    hybrid: bool,
) -> Option<f64> {
    fn walk(node: &Antecedent, lookup: &dyn Fn(&str) -> FuzzifiedInput, hybrid: bool, gate: &mut bool) -> f64 {
        match node {
            Antecedent::Leaf(cond) => {
                let input = lookup(&cond.variable);
                if hybrid {
                    if input.label != cond.term {
                        *gate = false;
                    }
                    input.grade.value()
                } else {
                    let idx = LinguisticTerm::ALL.iter().position(|t| *t == cond.term).unwrap();
                    input.term_grades[idx].value()
                }
            }
            Antecedent::Node { op, left, right, .. } => {
                let l = walk(left, lookup, hybrid, gate);
                let r = walk(right, lookup, hybrid, gate);
                match op {
                    Connective::And => l.min(r),
                    Connective::Or => l.max(r),
                }
            }
        }
    }
    let mut gate = true;
    let level = walk(antecedent, lookup, hybrid, &mut gate);
    if hybrid {
        gate.then_some(level)
    } else {
        (level > 0.0).then_some(level)
    }
}

pub fn fuzzified(variable: &str, label: LinguisticTerm, grade: f64, term_grades: [f64; 3]) -> FuzzifiedInput {
    FuzzifiedInput {
        variable: variable.to_string(),
        value: 0.0,
        grade: MembershipGrade::new(grade).unwrap(),
        label,
        term_grades: term_grades.map(|g| MembershipGrade::new(g).unwrap()),
    }
}

/// Label combinations over `names` matched by at
/// least one rule, by evaluating every rule's label gate on every combination.
pub fn covered_by_enumeration(rb: &RuleBase, names: &[&str]) -> Vec<Vec<LinguisticTerm>> {
    let mut combos: Vec<Vec<LinguisticTerm>> = vec![vec![]];
    for _ in names {
        combos = combos
            .into_iter()
            .flat_map(|p| {
                LinguisticTerm::ALL.into_iter().map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .filter(|combo| {
            rb.rules().iter().any(|rule| {
                rule.antecedent.leaves().iter().all(|leaf| {
                    names
                        .iter()
                        .position(|n| *n == leaf.variable)
                        .is_some_and(|i| combo[i] == leaf.term)
                })
            })
        })
        .collect()
}

pub fn random_term(rng: &mut impl Rng) -> LinguisticTerm {
    LinguisticTerm::ALL[rng.gen_range(0..3)]
}

/// Random antecedent of depth at most `max_depth` over `names`.
pub fn random_antecedent(rng: &mut impl Rng, names: &[&str], max_depth: usize) -> Antecedent {
    if max_depth <= 1 || rng.gen_bool(0.3) {
        return Antecedent::leaf(names[rng.gen_range(0..names.len())], random_term(rng));
    }
    let op = if rng.gen_bool(0.5) { Connective::And } else { Connective::Or };
    Antecedent::node(
        op,
        random_antecedent(rng, names, max_depth - 1),
        random_antecedent(rng, names, max_depth - 1),
    )
}

/// Flat surface with +-1 intensity jitter on every pixel.
pub fn glossy_patch(rng: &mut impl Rng, size: u32) -> GrayImage {
    let level: i32 = rng.gen_range(40..=215);
    GrayImage::from_fn(size, size, |_, _| (level + rng.gen_range(-1..=1)) as u8)
}

/// Independent uniform intensities.
pub fn rough_patch(rng: &mut impl Rng, size: u32) -> GrayImage {
    GrayImage::from_fn(size, size, |_, _| rng.gen())
}

/// `(far, frr)` at `threshold` by direct counting.
pub fn count_rates(scores: &[(f64, bool)], threshold: f64) -> (f64, f64) {
    let attacks: Vec<_> = scores.iter().filter(|s| !s.1).collect();
    let lives: Vec<_> = scores.iter().filter(|s| s.1).collect();
    let far = attacks.iter().filter(|s| s.0 >= threshold).count() as f64 / attacks.len() as f64;
    let frr = lives.iter().filter(|s| s.0 < threshold).count() as f64 / lives.len() as f64;
    (far, frr)
}

/// Every unique score and every midpoint between neighbouring unique scores.
pub fn sweep_thresholds(scores: &[(f64, bool)]) -> Vec<f64> {
    let mut u: Vec<f64> = scores.iter().map(|s| s.0).collect();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    u.dedup();
    let mut out = u.clone();
    out.extend(u.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}
