//! Invariant checks. Each returns `Err(description)` on a violation so it can
//! be driven by proptest macros and by the acceptance runner alike.

use std::collections::BTreeSet;

use fuzzy_liveness::fuzzy::{
    aggregate, default_variables, defuzzify_cog, evaluate_rule, fuzzify_movement, fuzzify_quality,
    leaf_grade, AggregatedOutput, InferenceMode, InputMap, LinguisticTerm, MembershipGrade,
    RuleActivation, EYE, MOUTH, QUALITY,
};
use fuzzy_liveness::motion::{
    movement_flags, pair_difference, BoxRect, FrameSequence, MovementDetectorConfig, RegionKind,
    RegionTrack,
};
use fuzzy_liveness::pipeline::{decide, LivenessEngine, PipelineConfig, Verdict};
use fuzzy_liveness::raster::GrayImage;
use fuzzy_liveness::rules::{
    format_rules, parse_rules, validate_rulebase, Antecedent, Condition, Connective, Rule, RuleBase,
};
use fuzzy_liveness::texture::{histogram, homogeneity, lbp_transform, HomogeneityWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{covered_by_enumeration, fuzzified, random_antecedent, random_image, random_term};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn movement_grade_monotone(n: u32) -> Check {
    let mut prev = -1.0;
    for c in 0..n {
        let g = fuzzify_movement(c, n).map_err(|e| e.to_string())?.value();
        ensure((0.0..=1.0).contains(&g), || format!("grade {g} out of range at c={c}, n={n}"))?;
        ensure(g >= prev, || format!("grade fell at c={c}, n={n}"))?;
        prev = g;
    }
    ensure(prev == 1.0, || format!("c = n - 1 gives {prev}, not 1"))?;
    ensure(fuzzify_movement(0, n).unwrap().value() == 0.0, || "c = 0 is not 0".into())
}

pub fn quality_grade_monotone(a: f64, b: f64) -> Check {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (glo, ghi) = (fuzzify_quality(lo).unwrap().value(), fuzzify_quality(hi).unwrap().value());
    ensure(glo >= ghi, || format!("quality grade rose from {lo} to {hi}"))?;
    if lo <= 256.0 {
        ensure(glo == 1.0, || format!("quality grade at {lo} is {glo}, not 1"))?;
    }
    ensure(ghi > 0.0 && ghi <= 1.0, || format!("quality grade {ghi} out of range"))
}

/// `t` in `[0, 1]` picks a point of the variable's domain.
pub fn no_dead_zone(variable: usize, t: f64) -> Check {
    let vars = default_variables();
    let all: Vec<_> = vars.inputs.iter().chain(std::iter::once(&vars.output)).collect();
    let v = all[variable % all.len()];
    let (lo, hi) = v.domain();
    let x = lo + (hi - lo) * t;
    let best = v.grades(x).iter().map(|g| g.value()).fold(0.0, f64::max);
    ensure(best > 0.0, || format!("{} has no positive term at {x}", v.name()))
}

fn random_inputs(rng: &mut ChaCha8Rng) -> InputMap {
    [EYE, MOUTH, QUALITY]
        .into_iter()
        .map(|name| {
            let grades = [rng.gen::<f64>(), rng.gen(), rng.gen()];
            (name.to_string(), fuzzified(name, random_term(rng), rng.gen(), grades))
        })
        .collect()
}

pub fn rule_level_bounded(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let antecedent = random_antecedent(&mut rng, &[EYE, MOUTH, QUALITY], 5);
    let rb = RuleBase::new([(antecedent, Condition::new("output", LinguisticTerm::Good))]);
    let rule = &rb.rules()[0];
    let inputs = random_inputs(&mut rng);
    for mode in [InferenceMode::PaperHybrid, InferenceMode::StandardMamdani] {
        let leaf_grades: Vec<f64> = rule
            .antecedent
            .leaves()
            .iter()
            .map(|c| leaf_grade(&inputs[&c.variable], c.term, mode).value())
            .collect();
        let lo = leaf_grades.iter().copied().fold(1.0, f64::min);
        let hi = leaf_grades.iter().copied().fold(0.0, f64::max);
        if let Some(act) = evaluate_rule(rule, &inputs, mode).map_err(|e| e.to_string())? {
            let level = act.level.value();
            ensure(lo <= level && level <= hi, || format!("{mode:?}: level {level} outside [{lo}, {hi}]"))?;
        }
    }
    Ok(())
}

fn random_activations(rng: &mut ChaCha8Rng) -> Vec<RuleActivation> {
    (0..rng.gen_range(1..=4))
        .map(|i| RuleActivation {
            rule_id: i + 1,
            output_term: random_term(rng),
            level: MembershipGrade::new(rng.gen_range(0.01..=1.0)).unwrap(),
        })
        .collect()
}

pub fn aggregate_bounds(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let acts = random_activations(&mut rng);
    let output = default_variables().output;
    let agg = aggregate(&acts, &output, 0.001).map_err(|e| e.to_string())?;
    for &(x, mu) in agg.samples() {
        ensure(mu <= 1.0, || format!("aggregate {mu} above 1 at {x}"))?;
        for act in &acts {
            let clipped = act.level.value().min(output.term(act.output_term).eval(x).value());
            ensure(mu >= clipped, || format!("aggregate {mu} below contribution {clipped} at {x}"))?;
        }
    }
    let cog = defuzzify_cog(&agg).map_err(|e| e.to_string())?;
    ensure((0.0..=1.0).contains(&cog), || format!("cog {cog} outside the output domain"))
}

/// A curve symmetric about the middle of `[0, 1]` defuzzifies to 0.5.
pub fn symmetric_cog(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half: Vec<f64> = (0..=500).map(|_| rng.gen::<f64>()).collect();
    let samples: Vec<(f64, f64)> = (0..=1000)
        .map(|i| {
            let j = if i <= 500 { i } else { 1000 - i };
            (i as f64 / 1000.0, half[j])
        })
        .collect();
    let agg = AggregatedOutput::new((0.0, 1.0), samples).map_err(|e| e.to_string())?;
    let cog = defuzzify_cog(&agg).map_err(|e| e.to_string())?;
    ensure((cog - 0.5).abs() <= 0.001, || format!("symmetric curve gives {cog}"))
}

pub fn score_bounds(c_eye: u32, c_mouth: u32, n: u32, psi: f64) -> Check {
    for mode in [InferenceMode::PaperHybrid, InferenceMode::StandardMamdani] {
        let engine = LivenessEngine::new(PipelineConfig { mode, ..PipelineConfig::default() })
            .map_err(|e| e.to_string())?;
        let score = engine
            .infer_raw(c_eye % n, c_mouth % n, n, psi)
            .map_err(|e| e.to_string())?
            .score;
        ensure((0.0..=1.0).contains(&score.crisp), || format!("crisp {} out of range", score.crisp))?;
        if decide(score.crisp, 0.5) == Verdict::Live {
            ensure(
                score.fired.iter().any(|a| a.output_term != LinguisticTerm::Poor && a.level.value() > 0.0),
                || format!("{mode:?}: live without a non-poor rule ({c_eye}, {c_mouth}, {n}, {psi})"),
            )?;
        }
    }
    Ok(())
}

pub fn decision_monotone(scores: &[f64], t1: f64, t2: f64) -> Check {
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    for &s in scores {
        if decide(s, lo) == Verdict::Spoof {
            ensure(decide(s, hi) == Verdict::Spoof, || format!("score {s}: spoof at {lo} but live at {hi}"))?;
        }
    }
    Ok(())
}

/// On plateau inputs (each variable fully inside one term) the hybrid fired
/// set is contained in the standard one, and equal for pure-AND rules.
pub fn plateau_agreement(c_eye: u32, c_mouth: u32, psi: f64) -> Check {
    let vars = default_variables();
    let on_plateau = |name: &str, x: f64| {
        vars.input(name).unwrap().grades(x).iter().filter(|g| g.value() == 1.0).count() == 1
            && vars.input(name).unwrap().grades(x).iter().filter(|g| g.value() > 0.0).count() == 1
    };
    if !(on_plateau(EYE, f64::from(c_eye)) && on_plateau(MOUTH, f64::from(c_mouth)) && on_plateau(QUALITY, psi)) {
        return Ok(());
    }
    let fired = |mode| -> Result<(BTreeSet<usize>, BTreeSet<usize>), String> {
        let engine = LivenessEngine::new(PipelineConfig { mode, ..PipelineConfig::default() })
            .map_err(|e| e.to_string())?;
        let score = engine.infer_raw(c_eye, c_mouth, 20, psi).map_err(|e| e.to_string())?.score;
        let all: BTreeSet<usize> = score.fired.iter().map(|a| a.rule_id).collect();
        let and_only: BTreeSet<usize> = all
            .iter()
            .copied()
            .filter(|id| is_and_only(engine.rules().get(*id).unwrap()))
            .collect();
        Ok((all, and_only))
    };
    let (hybrid, hybrid_and) = fired(InferenceMode::PaperHybrid)?;
    let (standard, standard_and) = fired(InferenceMode::StandardMamdani)?;
    ensure(hybrid.is_subset(&standard), || format!("hybrid {hybrid:?} not within standard {standard:?}"))?;
    ensure(hybrid_and == standard_and, || {
        format!("AND-only rules differ: hybrid {hybrid_and:?}, standard {standard_and:?}")
    })
}

fn is_and_only(rule: &Rule) -> bool {
    fn walk(a: &Antecedent) -> bool {
        match a {
            Antecedent::Leaf(_) => true,
            Antecedent::Node { op, left, right, .. } => *op == Connective::And && walk(left) && walk(right),
        }
    }
    walk(&rule.antecedent)
}

pub fn lbp_shift_invariant(seed: u64, shift: u8) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = GrayImage::from_fn(12, 9, |_, _| rng.gen_range(0..=255 - shift));
    let shifted = GrayImage::from_fn(12, 9, |x, y| base.get(x, y) + shift);
    let a = lbp_transform(&base).unwrap();
    let b = lbp_transform(&shifted).unwrap();
    ensure(a.codes() == b.codes(), || format!("codes changed under +{shift}"))
}

pub fn homogeneity_widening(seed: u64, k: u8, l: u8, grow: u8) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hist = histogram(&lbp_transform(&random_image(&mut rng, 10, 10)).unwrap());
    let (k, l) = (u16::from(k.min(l)), u16::from(k.max(l)));
    let inner = HomogeneityWindow::new(k, l).unwrap();
    let outer = HomogeneityWindow::new(k.saturating_sub(u16::from(grow)), (l + u16::from(grow)).min(255)).unwrap();
    for norm in [None, Some(1300.0)] {
        let a = homogeneity(&hist, inner, norm).unwrap();
        let b = homogeneity(&hist, outer, norm).unwrap();
        ensure(b >= a, || format!("widening [{k}, {l}] by {grow} dropped psi from {a} to {b}"))?;
    }
    Ok(())
}

const REGION: BoxRect = BoxRect { x: 3, y: 2, w: 10, h: 8 };

fn random_sequence(rng: &mut ChaCha8Rng) -> FrameSequence {
    let frames = (0..rng.gen_range(2..8)).map(|_| random_image(rng, 18, 14)).collect();
    FrameSequence::new(frames).unwrap()
}

pub fn motion_threshold_monotone(seed: u64, t1: f64, t2: f64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = random_sequence(&mut rng);
    let track = RegionTrack::fixed(RegionKind::Eye, REGION, seq.len());
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let count = |t: f64| {
        let cfg = MovementDetectorConfig { mismatch_threshold: t, ..MovementDetectorConfig::default() };
        movement_flags(&seq, &track, &cfg).unwrap().iter().filter(|f| **f).count()
    };
    ensure(count(hi) <= count(lo), || format!("c rose when the threshold went from {lo} to {hi}"))
}

pub fn motion_region_local(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = random_sequence(&mut rng);
    let repainted = seq
        .frames()
        .iter()
        .map(|f| {
            let noise = random_image(&mut rng, 18, 14);
            GrayImage::from_fn(18, 14, |x, y| if REGION.contains(x, y) { f.get(x, y) } else { noise.get(x, y) })
        })
        .collect();
    let repainted = FrameSequence::new(repainted).unwrap();
    let track = RegionTrack::fixed(RegionKind::Mouth, REGION, seq.len());
    let cfg = MovementDetectorConfig { mismatch_threshold: rng.gen_range(0.01..0.3), ..MovementDetectorConfig::default() };
    ensure(
        movement_flags(&seq, &track, &cfg).unwrap() == movement_flags(&repainted, &track, &cfg).unwrap(),
        || "content outside the box changed the flags".into(),
    )
}

pub fn pair_difference_symmetric(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_image(&mut rng, 20, 16);
    let b = random_image(&mut rng, 20, 16);
    let ra = BoxRect { x: rng.gen_range(0..8), y: rng.gen_range(0..6), w: rng.gen_range(4..12), h: rng.gen_range(4..10) };
    let rb = BoxRect { x: rng.gen_range(0..8), y: rng.gen_range(0..6), w: rng.gen_range(4..12), h: rng.gen_range(4..10) };
    let block = rng.gen_range(2..5);
    let d1 = pair_difference(&a, ra, &b, rb, block);
    let d2 = pair_difference(&b, rb, &a, ra, block);
    ensure(d1 == d2, || format!("pair difference {d1} vs swapped {d2}"))
}

pub fn parse_format_idempotent(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = Vec::new();
    let mut text = String::new();
    for _ in 0..rng.gen_range(1..5) {
        let a = random_antecedent(&mut rng, &[EYE, MOUTH, QUALITY, "nose"], 4);
        if seen.contains(&a) {
            continue;
        }
        seen.push(a.clone());
        let rb = RuleBase::new([(a, Condition::new("output", random_term(&mut rng)))]);
        text.push_str(&format_rules(&rb));
    }
    let first = parse_rules(&text).map_err(|e| e.to_string())?;
    let again = parse_rules(&format_rules(&first)).map_err(|e| e.to_string())?;
    ensure(first == again, || format!("canonical text changed the rule base:\n{text}"))
}

pub fn coverage_matches_enumeration(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..6) {
        let a = random_antecedent(&mut rng, &[EYE, MOUTH, QUALITY], 4);
        if !rules.iter().any(|(b, _)| *b == a) {
            rules.push((a, Condition::new("output", random_term(&mut rng))));
        }
    }
    let rb = RuleBase::new(rules);
    let report = validate_rulebase(&rb, &default_variables());
    let names = [EYE, MOUTH, QUALITY];
    let covered: BTreeSet<_> = covered_by_enumeration(&rb, &names).into_iter().collect();
    let uncovered: BTreeSet<_> = report.uncovered.iter().cloned().collect();
    ensure(covered.len() + uncovered.len() == 27 && covered.is_disjoint(&uncovered), || {
        format!("covered {} + uncovered {} do not partition 27", covered.len(), uncovered.len())
    })
}
