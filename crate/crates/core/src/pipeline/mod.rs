//! End-to-end liveness scoring: movement counts and texture homogeneity in,
//! crisp score and accept/reject decision out.

mod config;
mod eer;
mod report;
mod synth;

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{FrameSelection, PipelineConfig};
pub use eer::{candidate_thresholds, rates_at, tune_threshold_eer, EerError, EerPoint, ScoredSample};
pub use report::{ClassAccuracy, Confusion, EvaluationReport, SequenceOutcome};
pub use synth::{generate_corpus, CorpusSpec, SynthError};

use crate::dataset::{load_tracks, Dataset, ManifestError, SequenceEntry};
use crate::fuzzy::{
    aggregate, default_variables, defuzzify_cog, fire_rules, fuzzify_movement, fuzzify_quality,
    AggregatedOutput, FuzzifiedInput, FuzzyError, InputMap, LinguisticTerm, LinguisticVariable,
    RuleActivation, VariableSet, EYE, MOUTH, QUALITY,
};
use crate::motion::{
    count_movements, DetectorKind, MotionError, MovementObservation, RegionKind,
};
use crate::rules::{default_rulebase, ParseError, RuleBase, RuleParser};
use crate::texture::TextureError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("rules: {0}")]
    Rules(#[from] ParseError),
    #[error("rules: cannot read {path}: {message}")]
    RulesIo { path: String, message: String },
    #[error("load: {0}")]
    Load(#[from] ManifestError),
    #[error("motion: {0}")]
    Motion(#[from] MotionError),
    #[error("texture: {0}")]
    Texture(#[from] TextureError),
    #[error("fuzzy: {0}")]
    Fuzzy(#[from] FuzzyError),
    #[error("sequence `{0}` lists no frames")]
    NoFrames(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Live,
    Spoof,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Live => "live",
            Verdict::Spoof => "spoof",
        })
    }
}

/// The measurements a score was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    pub eye: MovementObservation,
    pub mouth: MovementObservation,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessScore {
    /// Center of gravity of the aggregated output, or 0 on fallback.
    pub crisp: f64,
    pub label: LinguisticTerm,
    /// Rules that fired, in rule order.
    pub fired: Vec<RuleActivation>,
    /// Set when no rule produced a positive activation.
    pub fallback: bool,
    pub inputs: Vec<FuzzifiedInput>,
    pub observations: Observations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub threshold: f64,
    pub score: LivenessScore,
}

/// A score plus the aggregated curve it was defuzzified from.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub score: LivenessScore,
    pub aggregated: AggregatedOutput,
}

/// Live iff `crisp >= threshold`.
pub fn decide(crisp: f64, threshold: f64) -> Verdict {
    if crisp >= threshold {
        Verdict::Live
    } else {
        Verdict::Spoof
    }
}

/// Configured variables, rules and parameters, ready to score sequences.
#[derive(Debug, Clone)]
pub struct LivenessEngine {
    config: PipelineConfig,
    variables: VariableSet,
    rules: RuleBase,
}

impl LivenessEngine {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let rules = match &config.rules {
            None => default_rulebase(),
            Some(path) => {
                let bytes = fs::read(path).map_err(|e| PipelineError::RulesIo {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                RuleParser::with_aliases(&config.aliases).parse_bytes(&bytes)?
            }
        };
        let variables = config.variables.clone().unwrap_or_else(default_variables);
        Ok(LivenessEngine {
            config,
            variables,
            rules,
        })
    }

    pub fn with_rules(config: PipelineConfig, rules: RuleBase) -> Result<Self, PipelineError> {
        let mut engine = LivenessEngine::new(PipelineConfig {
            rules: None,
            ..config
        })?;
        engine.rules = rules;
        Ok(engine)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn variables(&self) -> &VariableSet {
        &self.variables
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    fn input(&self, name: &str) -> &LinguisticVariable {
        self.variables.input(name).expect("validated variable set")
    }

    /// Movement counts are rescaled to the eye/mouth domain as
    /// `lo + c * (hi - lo) / (n - 1)`, which is the raw count itself when the
    /// domain is `[0, n - 1]`.
    fn fuzzify_movement_input(
        &self,
        name: &str,
        obs: MovementObservation,
    ) -> Result<FuzzifiedInput, PipelineError> {
        let grade = fuzzify_movement(obs.c, obs.n)?;
        let var = self.input(name);
        let (lo, hi) = var.domain();
        let value = var.saturate(lo + f64::from(obs.c) * (hi - lo) / f64::from(obs.n - 1));
        Ok(var.fuzzify(value, grade)?)
    }

    /// Runs fuzzification, rule firing, aggregation and defuzzification.
    pub fn infer(&self, observations: Observations) -> Result<Inference, PipelineError> {
        let eye = self.fuzzify_movement_input(EYE, observations.eye)?;
        let mouth = self.fuzzify_movement_input(MOUTH, observations.mouth)?;
        let quality_var = self.input(QUALITY);
        let quality = quality_var.fuzzify(
            quality_var.saturate(observations.psi),
            fuzzify_quality(observations.psi)?,
        )?;
        let inputs: InputMap = [eye, mouth, quality]
            .into_iter()
            .map(|i| (i.variable.clone(), i))
            .collect();

        let fired = fire_rules(&self.rules, &inputs, self.config.mode)?;
        let aggregated = aggregate(&fired, &self.variables.output, self.config.cog_step)?;
        let (crisp, fallback) = match defuzzify_cog(&aggregated) {
            Ok(x) => (x, false),
            Err(FuzzyError::NoActivation) => (0.0, true),
            Err(e) => return Err(e.into()),
        };
        let label = self.variables.output.classify(self.variables.output.saturate(crisp))?;
        Ok(Inference {
            score: LivenessScore {
                crisp,
                label,
                fired,
                fallback,
                inputs: inputs.into_values().collect(),
                observations,
            },
            aggregated,
        })
    }

    /// Convenience for raw `(c_eye, c_mouth, n, psi)` inputs.
    pub fn infer_raw(&self, c_eye: u32, c_mouth: u32, n: u32, psi: f64) -> Result<Inference, PipelineError> {
        self.infer(Observations {
            eye: MovementObservation { kind: RegionKind::Eye, c: c_eye, n },
            mouth: MovementObservation { kind: RegionKind::Mouth, c: c_mouth, n },
            psi,
        })
    }

    /// Gathers movement counts and homogeneity for one manifest entry.
    pub fn observe(&self, entry: &SequenceEntry, base_dir: &Path) -> Result<Observations, PipelineError> {
        let precomputed = self.config.detector.detector == DetectorKind::Precomputed;
        let needs_frames = !precomputed || entry.psi.is_none();
        let loaded = if needs_frames {
            if entry.frames.is_empty() {
                return Err(PipelineError::NoFrames(entry.id.clone()));
            }
            Some(load_tracks(entry, base_dir)?)
        } else {
            None
        };

        let (eye, mouth) = if precomputed {
            let flags = entry
                .movement_flags
                .as_ref()
                .ok_or(MotionError::MissingFlags(RegionKind::Eye))?;
            (
                MovementObservation::from_flags(RegionKind::Eye, &flags.eye)?,
                MovementObservation::from_flags(RegionKind::Mouth, &flags.mouth)?,
            )
        } else {
            let (seq, tracks) = loaded.as_ref().expect("frames loaded for block detector");
            (
                count_movements(seq, &tracks[0], &self.config.detector)?,
                count_movements(seq, &tracks[1], &self.config.detector)?,
            )
        };

        let psi = match (entry.psi, &loaded) {
            (Some(psi), _) => psi,
            (None, Some((seq, _))) => {
                let texture = &self.config.texture;
                match self.config.frame_selection {
                    FrameSelection::Median => texture.measure(&seq.frames()[(seq.len() - 1) / 2])?,
                    FrameSelection::Mean => {
                        let mut sum = 0.0;
                        for frame in seq.frames() {
                            sum += texture.measure(frame)?;
                        }
                        sum / seq.len() as f64
                    }
                }
            }
            (None, None) => unreachable!("frames are loaded when psi is absent"),
        };
        Ok(Observations { eye, mouth, psi })
    }

    pub fn score_sequence(&self, entry: &SequenceEntry, base_dir: &Path) -> Result<LivenessScore, PipelineError> {
        let obs = self.observe(entry, base_dir)?;
        Ok(self.infer(obs)?.score)
    }

    pub fn decide(&self, score: LivenessScore) -> Decision {
        Decision {
            verdict: decide(score.crisp, self.config.threshold),
            threshold: self.config.threshold,
            score,
        }
    }

    /// Scores one entry; any failure becomes a Spoof outcome carrying the error.
    pub fn outcome(&self, entry: &SequenceEntry, base_dir: &Path) -> SequenceOutcome {
        match self.score_sequence(entry, base_dir) {
            Ok(score) => SequenceOutcome {
                id: entry.id.clone(),
                label: entry.label,
                crisp: score.crisp,
                output_label: score.label,
                verdict: decide(score.crisp, self.config.threshold),
                fallback: score.fallback,
                fired: score.fired.iter().map(|a| a.rule_id).collect(),
                error: None,
            },
            Err(e) => SequenceOutcome {
                id: entry.id.clone(),
                label: entry.label,
                crisp: 0.0,
                output_label: LinguisticTerm::Poor,
                verdict: Verdict::Spoof,
                fallback: true,
                fired: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    }

    /// Scores every sequence of a dataset in parallel and summarizes the
    /// results at the configured threshold.
    pub fn evaluate(&self, dataset: &Dataset) -> EvaluationReport {
        let mut outcomes: Vec<SequenceOutcome> = dataset
            .manifest
            .sequences
            .par_iter()
            .map(|entry| self.outcome(entry, &dataset.base_dir))
            .collect();
        outcomes.sort_by(|a, b| a.id.cmp(&b.id));
        EvaluationReport::from_outcomes(outcomes, self.config.threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;

    const PAPER_RULES: &str = "\
IF eye movement IS poor AND mouth movement IS poor THEN output IS poor
IF eye movement IS good OR mouth movement IS good AND image quality IS good THEN output IS good
IF eye movement IS good OR mouth movement IS poor AND image quality IS good THEN output IS good
";

    fn paper_engine() -> LivenessEngine {
        LivenessEngine::with_rules(PipelineConfig::default(), parse_rules(PAPER_RULES).unwrap()).unwrap()
    }

    /// COG of the Good output term clipped at `level`, by direct summation.
    fn clipped_good_cog(level: f64) -> f64 {
        let good = |x: f64| ((x - 0.5) / 0.1).clamp(0.0, 1.0);
        let (mut m, mut mx) = (0.0, 0.0);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let mu = good(x).min(level);
            m += mu;
            mx += mu * x;
        }
        mx / m
    }

    #[test]
    fn worked_example_end_to_end() {
        let inf = paper_engine().infer_raw(15, 10, 20, 400.0).unwrap();
        let s = &inf.score;
        assert_eq!(s.fired.len(), 1);
        assert_eq!(s.fired[0].rule_id, 2);
        assert!((s.fired[0].level.value() - 0.64).abs() < 1e-9);
        assert!(!s.fallback);
        assert_eq!(s.label, LinguisticTerm::Good);
        assert!((s.crisp - clipped_good_cog(0.64)).abs() < 1e-9);
        assert_eq!(decide(s.crisp, 0.5), Verdict::Live);
    }

    #[test]
    fn frozen_glossy_sequence_is_spoof() {
        let s = paper_engine().infer_raw(0, 0, 20, 1200.0).unwrap().score;
        let labels: Vec<_> = s.inputs.iter().map(|i| i.label).collect();
        assert_eq!(labels, vec![LinguisticTerm::Poor; 3]);
        // rule 1 matches, at level min(0, 0) = 0
        assert_eq!(s.fired.iter().map(|a| a.rule_id).collect::<Vec<_>>(), vec![1]);
        assert_eq!(s.label, LinguisticTerm::Poor);
        assert_eq!(decide(s.crisp, 0.5), Verdict::Spoof);

        let default = LivenessEngine::new(PipelineConfig::default()).unwrap();
        let s = default.infer_raw(0, 0, 20, 1200.0).unwrap().score;
        assert_eq!(s.label, LinguisticTerm::Poor);
        assert!(s.crisp < 0.4);
        assert_eq!(decide(s.crisp, 0.5), Verdict::Spoof);
    }

    #[test]
    fn no_rule_fires_falls_back_to_zero() {
        // (average, average, average) matches none of the three rules
        let s = paper_engine().infer_raw(8, 7, 20, 700.0).unwrap().score;
        assert!(s.fired.is_empty());
        assert!(s.fallback);
        assert_eq!(s.crisp, 0.0);
        assert_eq!(s.label, LinguisticTerm::Poor);
        assert_eq!(decide(s.crisp, 0.5), Verdict::Spoof);
    }

    #[test]
    fn counts_rescale_to_domain() {
        // 30 of 39 pairs is the same ratio as 15 of 19.5; scaled value 14.6 is Good
        let s = paper_engine().infer_raw(30, 20, 40, 400.0).unwrap().score;
        let eye = s.inputs.iter().find(|i| i.variable == EYE).unwrap();
        assert!((eye.value - 30.0 * 19.0 / 39.0).abs() < 1e-12);
        assert_eq!(eye.label, LinguisticTerm::Good);
    }

    #[test]
    fn quality_outside_domain_saturates() {
        let s = paper_engine().infer_raw(15, 12, 20, 100.0).unwrap().score;
        let q = s.inputs.iter().find(|i| i.variable == QUALITY).unwrap();
        assert_eq!(q.value, 256.0);
        assert_eq!(q.grade.value(), 1.0);
        let s = paper_engine().infer_raw(0, 0, 20, 5000.0).unwrap().score;
        let q = s.inputs.iter().find(|i| i.variable == QUALITY).unwrap();
        assert_eq!(q.label, LinguisticTerm::Poor);
    }

    #[test]
    fn invalid_counts_are_errors() {
        assert!(matches!(
            paper_engine().infer_raw(20, 0, 20, 400.0),
            Err(PipelineError::Fuzzy(FuzzyError::InvalidCounter { .. }))
        ));
    }
}
