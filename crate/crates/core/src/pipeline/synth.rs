//! Synthetic labelled corpus for exercising the pipeline end to end.
//!
//! Each sequence is a textured face plane with an eye and a mouth box that
//! toggle between an open and a closed (darkened) state. Texture roughness is
//! controlled by the fraction `p` of pixels replaced by uniform noise over a
//! flat base level, and `p` is tuned so the measured homogeneity of the median
//! frame hits a per-sequence target.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{GroundTruth, Manifest, MovementFlags, RegionSpec, Regions, SequenceEntry, SequenceLabel};
use crate::motion::BoxRect;
use crate::raster::{GrayImage, RasterError};
use crate::texture::{TextureConfig, TextureError};

const BISECTION_STEPS: usize = 40;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("cannot create {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Texture(#[from] TextureError),
}

/// Shape of a generated corpus. Count ranges are inclusive `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub frames: u32,
    pub width: u32,
    pub height: u32,
    pub live: usize,
    pub attacks_per_medium: usize,
    pub live_eye: [u32; 2],
    pub live_mouth: [u32; 2],
    pub photo_movement: [u32; 2],
    pub video_movement: [u32; 2],
    pub live_psi: [f64; 2],
    pub attack_psi: [f64; 2],
    /// Relative `(x, y, w, h)` boxes.
    pub eye_box: [f64; 4],
    pub mouth_box: [f64; 4],
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            frames: 20,
            width: 64,
            height: 64,
            live: 50,
            attacks_per_medium: 50,
            live_eye: [12, 19],
            live_mouth: [11, 19],
            photo_movement: [0, 0],
            video_movement: [0, 2],
            live_psi: [300.0, 450.0],
            attack_psi: [1000.0, 1250.0],
            eye_box: [0.2, 0.2, 0.6, 0.2],
            mouth_box: [0.3, 0.65, 0.4, 0.2],
        }
    }
}

impl CorpusSpec {
    /// Parses a TOML document; missing keys take their defaults.
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let spec: CorpusSpec =
            toml::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.frames < 2 {
            return bad(format!("frames = {} is below 2", self.frames));
        }
        let pairs = self.frames - 1;
        for (name, [lo, hi]) in [
            ("live_eye", self.live_eye),
            ("live_mouth", self.live_mouth),
            ("photo_movement", self.photo_movement),
            ("video_movement", self.video_movement),
        ] {
            if lo > hi || hi > pairs {
                return bad(format!("{name} = [{lo}, {hi}] must satisfy lo <= hi <= {pairs}"));
            }
        }
        for (name, [lo, hi]) in [("live_psi", self.live_psi), ("attack_psi", self.attack_psi)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} = [{lo}, {hi}] must satisfy 0 < lo <= hi"));
            }
        }
        let (eye, mouth) = (self.eye_rect(), self.mouth_rect());
        for (name, rect) in [("eye_box", eye), ("mouth_box", mouth)] {
            if !rect.fits(self.width, self.height) {
                return bad(format!("{name} {rect:?} does not fit a {}x{} frame", self.width, self.height));
            }
        }
        if overlaps(eye, mouth) {
            return bad("eye_box and mouth_box overlap".into());
        }
        if self.width < 3 || self.height < 3 {
            return bad("frames must be at least 3x3".into());
        }
        Ok(())
    }

    fn eye_rect(&self) -> BoxRect {
        BoxRect::from_relative(self.eye_box, self.width, self.height)
    }

    fn mouth_rect(&self) -> BoxRect {
        BoxRect::from_relative(self.mouth_box, self.width, self.height)
    }

    fn movement_range(&self, label: SequenceLabel) -> ([u32; 2], [u32; 2]) {
        match label {
            SequenceLabel::Live => (self.live_eye, self.live_mouth),
            SequenceLabel::PhotoLaptop | SequenceLabel::PhotoPaper => {
                (self.photo_movement, self.photo_movement)
            }
            SequenceLabel::VideoHd => (self.video_movement, self.video_movement),
        }
    }
}

fn overlaps(a: BoxRect, b: BoxRect) -> bool {
    a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h
}

fn sequence_id(label: SequenceLabel, index: usize) -> String {
    let stem = match label {
        SequenceLabel::Live => "live",
        SequenceLabel::PhotoLaptop => "photo-laptop",
        SequenceLabel::PhotoPaper => "photo-paper",
        SequenceLabel::VideoHd => "video-hd",
    };
    format!("{stem}-{index:03}")
}

/// Per-pixel texture parameters of one sequence.
struct Surface {
    width: u32,
    height: u32,
    level: u8,
    /// Noise threshold draw and noise value per pixel.
    draws: Vec<(f64, u8)>,
}

impl Surface {
    fn random(rng: &mut ChaCha8Rng, width: u32, height: u32) -> Self {
        let level = rng.gen_range(100..=160);
        let draws = (0..width as usize * height as usize)
            .map(|_| (rng.gen::<f64>(), rng.gen::<u8>()))
            .collect();
        Surface { width, height, level, draws }
    }

    fn render(&self, p: f64, closed: &[(BoxRect, bool)]) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            let (u, v) = self.draws[(y * self.width + x) as usize];
            let base = if u < p { v } else { self.level };
            let dark = closed.iter().any(|(r, c)| *c && r.contains(x, y));
            if dark {
                base / 2
            } else {
                base
            }
        })
    }
}

/// Open/closed state per frame, flipping after each listed pair index.
fn states(initial: bool, changes: &[usize], frames: usize) -> Vec<bool> {
    let mut state = initial;
    let mut out = Vec::with_capacity(frames);
    for i in 0..frames {
        out.push(state);
        if changes.contains(&i) {
            state = !state;
        }
    }
    out
}

/// Noise fraction whose rendering measures closest to `target`, by bisection
/// on the (decreasing) homogeneity curve.
fn tune_noise(
    surface: &Surface,
    closed: &[(BoxRect, bool)],
    target: f64,
    texture: &TextureConfig,
) -> Result<(f64, f64), SynthError> {
    let measure = |p: f64| texture.measure(&surface.render(p, closed));
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut best_p, mut best_psi) = (0.0, measure(0.0)?);
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / 2.0;
        let psi = measure(mid)?;
        if (psi - target).abs() < (best_psi - target).abs() {
            (best_p, best_psi) = (mid, psi);
        }
        if psi > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best_p, best_psi))
}

struct Plan {
    id: String,
    label: SequenceLabel,
    seed: u64,
}

/// Writes `id/frame_XX.pgm` for every sequence plus `manifest.json` into
/// `out_dir` and returns the manifest. Output is a pure function of `spec`,
/// `seed` and `texture`.
pub fn generate_corpus(
    spec: &CorpusSpec,
    seed: u64,
    texture: &TextureConfig,
    out_dir: &Path,
) -> Result<Manifest, SynthError> {
    spec.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut plans = Vec::new();
    for label in SequenceLabel::ALL {
        let count = if label.is_live() { spec.live } else { spec.attacks_per_medium };
        for i in 0..count {
            plans.push(Plan {
                id: sequence_id(label, i),
                label,
                seed: master.gen(),
            });
        }
    }
    if plans.is_empty() {
        return Err(SynthError::InvalidSpec("corpus would be empty".into()));
    }
    create_dir(out_dir)?;

    let sequences = plans
        .par_iter()
        .map(|plan| generate_sequence(spec, plan, texture, out_dir))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = Manifest { sequences };
    let path = out_dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|source| SynthError::Io { path, source })?;
    Ok(manifest)
}

fn create_dir(path: &Path) -> Result<(), SynthError> {
    fs::create_dir_all(path).map_err(|source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn generate_sequence(
    spec: &CorpusSpec,
    plan: &Plan,
    texture: &TextureConfig,
    out_dir: &Path,
) -> Result<SequenceEntry, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let frames = spec.frames as usize;
    let pairs = frames - 1;
    let (eye_range, mouth_range) = spec.movement_range(plan.label);
    let c_eye = rng.gen_range(eye_range[0]..=eye_range[1]);
    let c_mouth = rng.gen_range(mouth_range[0]..=mouth_range[1]);
    let mut eye_changes = sample(&mut rng, pairs, c_eye as usize).into_vec();
    let mut mouth_changes = sample(&mut rng, pairs, c_mouth as usize).into_vec();
    eye_changes.sort_unstable();
    mouth_changes.sort_unstable();
    let eye_states = states(rng.gen(), &eye_changes, frames);
    let mouth_states = states(rng.gen(), &mouth_changes, frames);

    let psi_range = if plan.label.is_live() { spec.live_psi } else { spec.attack_psi };
    let psi_target = rng.gen_range(psi_range[0]..=psi_range[1]);
    let surface = Surface::random(&mut rng, spec.width, spec.height);

    let (eye, mouth) = (spec.eye_rect(), spec.mouth_rect());
    let closed_at = |i: usize| [(eye, eye_states[i]), (mouth, mouth_states[i])];
    let median = (frames - 1) / 2;
    let (p, psi_measured) = tune_noise(&surface, &closed_at(median), psi_target, texture)?;

    let dir = out_dir.join(&plan.id);
    create_dir(&dir)?;
    let mut paths = Vec::with_capacity(frames);
    for i in 0..frames {
        let rel = PathBuf::from(&plan.id).join(format!("frame_{i:02}.pgm"));
        surface.render(p, &closed_at(i)).save_pgm(out_dir.join(&rel))?;
        paths.push(rel);
    }

    let flags = |changes: &[usize]| (0..pairs).map(|i| changes.contains(&i)).collect();
    Ok(SequenceEntry {
        id: plan.id.clone(),
        label: plan.label,
        frames: paths,
        regions: Some(Regions {
            eye: RegionSpec::Relative { relative: spec.eye_box },
            mouth: RegionSpec::Relative { relative: spec.mouth_box },
        }),
        movement_flags: Some(MovementFlags {
            eye: flags(&eye_changes),
            mouth: flags(&mouth_changes),
        }),
        psi: None,
        ground_truth: Some(GroundTruth {
            c_eye,
            c_mouth,
            eye_changes,
            mouth_changes,
            psi_target,
            psi_measured,
        }),
    })
}
