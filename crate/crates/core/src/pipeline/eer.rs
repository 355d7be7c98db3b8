//! Equal-error-rate threshold selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub crisp: f64,
    pub live: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    /// `(far + frr) / 2` at `threshold`.
    pub eer: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EerError {
    #[error("threshold tuning needs at least one live and one attack score")]
    SingleClass,
    #[error("score list contains a non-finite value")]
    NonFinite,
}

/// `(far, frr)` when accepting every score `>= threshold`. A rate whose class
/// is absent is 0.
pub fn rates_at(samples: &[ScoredSample], threshold: f64) -> (f64, f64) {
    let (mut attacks, mut accepted_attacks, mut lives, mut rejected_lives) = (0u64, 0u64, 0u64, 0u64);
    for s in samples {
        let accepted = s.crisp >= threshold;
        if s.live {
            lives += 1;
            rejected_lives += u64::from(!accepted);
        } else {
            attacks += 1;
            accepted_attacks += u64::from(accepted);
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    (ratio(accepted_attacks, attacks), ratio(rejected_lives, lives))
}

fn unique_sorted(samples: &[ScoredSample]) -> Vec<f64> {
    let mut scores: Vec<f64> = samples.iter().map(|s| s.crisp).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    scores
}

/// The lowest score (everything accepted) followed by the midpoints between
/// consecutive distinct scores.
pub fn candidate_thresholds(samples: &[ScoredSample]) -> Vec<f64> {
    let unique = unique_sorted(samples);
    let mut out = Vec::with_capacity(unique.len());
    if let Some(first) = unique.first() {
        out.push(*first);
    }
    out.extend(unique.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}

/// Picks the candidate threshold minimizing `|FAR - FRR|`; ties go to the
/// lower threshold.
pub fn tune_threshold_eer(samples: &[ScoredSample]) -> Result<EerPoint, EerError> {
    if samples.iter().any(|s| !s.crisp.is_finite()) {
        return Err(EerError::NonFinite);
    }
    let lives = samples.iter().filter(|s| s.live).count() as u64;
    let attacks = samples.len() as u64 - lives;
    if lives == 0 || attacks == 0 {
        return Err(EerError::SingleClass);
    }
    let unique = unique_sorted(samples);
    // per distinct score: how many lives and attacks sit exactly there
    let mut live_at = vec![0u64; unique.len()];
    let mut attack_at = vec![0u64; unique.len()];
    for s in samples {
        let i = unique
            .binary_search_by(|u| u.total_cmp(&s.crisp))
            .expect("score present");
        if s.live {
            live_at[i] += 1;
        } else {
            attack_at[i] += 1;
        }
    }
    // Candidate i accepts exactly the scores >= unique[i]. Compare
    // |FAR - FRR| exactly as |aa * lives - lr * attacks| over a common denominator.
    let mut rejected_lives = 0u64;
    let mut accepted_attacks = attacks;
    let mut best: Option<(u128, usize, u64, u64)> = None;
    for i in 0..unique.len() {
        if i > 0 {
            rejected_lives += live_at[i - 1];
            accepted_attacks -= attack_at[i - 1];
        }
        let gap = (u128::from(accepted_attacks) * u128::from(lives))
            .abs_diff(u128::from(rejected_lives) * u128::from(attacks));
        if best.is_none_or(|(g, ..)| gap < g) {
            best = Some((gap, i, accepted_attacks, rejected_lives));
        }
    }
    let (_, i, aa, lr) = best.expect("at least one candidate");
    let threshold = if i == 0 { unique[0] } else { (unique[i - 1] + unique[i]) / 2.0 };
    let far = aa as f64 / attacks as f64;
    let frr = lr as f64 / lives as f64;
    Ok(EerPoint {
        threshold,
        far,
        frr,
        eer: (far + frr) / 2.0,
    })
}
