use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::eer::{tune_threshold_eer, EerPoint, ScoredSample};
use super::Verdict;
use crate::dataset::SequenceLabel;
use crate::fuzzy::LinguisticTerm;

/// Result for one sequence of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    pub id: String,
    pub label: SequenceLabel,
    pub crisp: f64,
    pub output_label: LinguisticTerm,
    pub verdict: Verdict,
    pub fallback: bool,
    pub fired: Vec<usize>,
    /// Why scoring failed; the verdict is then Spoof.
    pub error: Option<String>,
}

impl SequenceOutcome {
    pub fn correct(&self) -> bool {
        (self.verdict == Verdict::Live) == self.label.is_live()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub label: SequenceLabel,
    pub total: usize,
    pub correct: usize,
    /// Fraction correct, 0 for an empty class.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub live_accepted: usize,
    pub live_rejected: usize,
    pub attack_accepted: usize,
    pub attack_rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub threshold: f64,
    pub classes: Vec<ClassAccuracy>,
    pub confusion: Confusion,
    pub far: f64,
    pub frr: f64,
    pub accuracy: f64,
    /// Equal-error operating point over the same scores; absent when only
    /// one class is present.
    pub eer: Option<EerPoint>,
    pub failures: usize,
    pub sequences: Vec<SequenceOutcome>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvaluationReport {
    pub fn from_outcomes(sequences: Vec<SequenceOutcome>, threshold: f64) -> Self {
        let classes = SequenceLabel::ALL
            .iter()
            .map(|&label| {
                let rows = sequences.iter().filter(|s| s.label == label);
                let total = rows.clone().count();
                let correct = rows.filter(|s| s.correct()).count();
                ClassAccuracy {
                    label,
                    total,
                    correct,
                    accuracy: ratio(correct, total),
                }
            })
            .collect();

        let mut confusion = Confusion::default();
        for s in &sequences {
            let accepted = s.verdict == Verdict::Live;
            match (s.label.is_live(), accepted) {
                (true, true) => confusion.live_accepted += 1,
                (true, false) => confusion.live_rejected += 1,
                (false, true) => confusion.attack_accepted += 1,
                (false, false) => confusion.attack_rejected += 1,
            }
        }
        let lives = confusion.live_accepted + confusion.live_rejected;
        let attacks = confusion.attack_accepted + confusion.attack_rejected;

        let samples: Vec<ScoredSample> = sequences
            .iter()
            .map(|s| ScoredSample {
                crisp: s.crisp,
                live: s.label.is_live(),
            })
            .collect();

        EvaluationReport {
            threshold,
            classes,
            confusion,
            far: ratio(confusion.attack_accepted, attacks),
            frr: ratio(confusion.live_rejected, lives),
            accuracy: ratio(
                confusion.live_accepted + confusion.attack_rejected,
                sequences.len(),
            ),
            eer: tune_threshold_eer(&samples).ok(),
            failures: sequences.iter().filter(|s| s.error.is_some()).count(),
            sequences,
        }
    }

    pub fn class(&self, label: SequenceLabel) -> &ClassAccuracy {
        self.classes
            .iter()
            .find(|c| c.label == label)
            .expect("every label has a row")
    }

    /// Per-class accuracy table followed by the error rates.
    pub fn render_table(&self) -> String {
        let width = SequenceLabel::ALL
            .iter()
            .map(|l| l.caption().len())
            .max()
            .unwrap_or(0)
            .max("Class".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>9}  {:>8}", "Class", "Correct", "Accuracy");
        let _ = writeln!(out, "{}", "-".repeat(width + 21));
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:<width$}  {:>4}/{:<4}  {:>7.1}%",
                c.label.caption(),
                c.correct,
                c.total,
                c.accuracy * 100.0
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 21));
        let _ = writeln!(out, "threshold  {:.4}", self.threshold);
        let _ = writeln!(out, "accuracy   {:.2}%", self.accuracy * 100.0);
        let _ = writeln!(out, "FAR        {:.2}%", self.far * 100.0);
        let _ = writeln!(out, "FRR        {:.2}%", self.frr * 100.0);
        match &self.eer {
            Some(p) => {
                let _ = writeln!(out, "EER        {:.2}% at threshold {:.4}", p.eer * 100.0, p.threshold);
            }
            None => {
                let _ = writeln!(out, "EER        n/a (single class)");
            }
        }
        if self.failures > 0 {
            let _ = writeln!(out, "failures   {}", self.failures);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per sequence.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "label", "crisp", "output_label", "verdict", "correct", "fallback", "fired", "error"])?;
        for s in &self.sequences {
            let fired: Vec<String> = s.fired.iter().map(usize::to_string).collect();
            w.write_record([
                s.id.as_str(),
                s.label.as_str(),
                &format!("{:.6}", s.crisp),
                s.output_label.as_str(),
                &s.verdict.to_string(),
                &s.correct().to_string(),
                &s.fallback.to_string(),
                &fired.join(" "),
                s.error.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
