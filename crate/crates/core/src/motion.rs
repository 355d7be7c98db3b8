//! Movement counting over eye and mouth region tracks.
//!
//! For each consecutive frame pair the two region crops are resampled
//! (nearest neighbor) onto a common grid, split into square blocks, and the
//! mean absolute difference of block means (scaled to `[0, 1]`) is compared
//! against a mismatch threshold. Each pair above the threshold counts as one
//! movement, so `c` never exceeds `n - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::GrayImage;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("a frame sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("frame {index} is {actual:?}, expected {expected:?}")]
    NonUniformFrames {
        index: usize,
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("{kind} track has {boxes} boxes for {frames} frames")]
    LengthMismatch {
        kind: RegionKind,
        boxes: usize,
        frames: usize,
    },
    #[error("{kind} box {index} {rect:?} is outside the frame or smaller than 4x4")]
    InvalidTrack {
        kind: RegionKind,
        index: usize,
        rect: BoxRect,
    },
    #[error("mismatch threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),
    #[error("block size {0} must be at least 2")]
    InvalidBlockSize(u32),
    #[error("precomputed movement flags are missing for the {0} region")]
    MissingFlags(RegionKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Eye,
    Mouth,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionKind::Eye => "eye",
            RegionKind::Mouth => "mouth",
        })
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct BoxRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl From<[u32; 4]> for BoxRect {
    fn from(v: [u32; 4]) -> Self {
        BoxRect { x: v[0], y: v[1], w: v[2], h: v[3] }
    }
}

impl From<BoxRect> for [u32; 4] {
    fn from(b: BoxRect) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BoxRect {
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w >= 4
            && self.h >= 4
            && u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }

    /// Scales a relative `(x, y, w, h)` box (fractions of the frame) to pixels.
    pub fn from_relative(rel: [f64; 4], width: u32, height: u32) -> Self {
        let sx = |v: f64| (v * f64::from(width)).round().max(0.0) as u32;
        let sy = |v: f64| (v * f64::from(height)).round().max(0.0) as u32;
        BoxRect { x: sx(rel[0]), y: sy(rel[1]), w: sx(rel[2]), h: sy(rel[3]) }
    }

    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && py >= self.y && px - self.x < self.w && py - self.y < self.h
    }
}

/// At least two frames of identical size.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<GrayImage>,
}

impl FrameSequence {
    pub fn new(frames: Vec<GrayImage>) -> Result<Self, MotionError> {
        if frames.len() < 2 {
            return Err(MotionError::TooFewFrames(frames.len()));
        }
        let expected = frames[0].dimensions();
        if let Some((index, f)) = frames.iter().enumerate().find(|(_, f)| f.dimensions() != expected) {
            return Err(MotionError::NonUniformFrames {
                index,
                expected,
                actual: f.dimensions(),
            });
        }
        Ok(FrameSequence { frames })
    }

    pub fn frames(&self) -> &[GrayImage] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.frames[0].dimensions()
    }
}

/// One box per frame for a single facial region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTrack {
    pub kind: RegionKind,
    pub boxes: Vec<BoxRect>,
}

impl RegionTrack {
    pub fn fixed(kind: RegionKind, rect: BoxRect, frames: usize) -> Self {
        RegionTrack { kind, boxes: vec![rect; frames] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementObservation {
    pub kind: RegionKind,
    /// Frame pairs judged to contain movement.
    pub c: u32,
    /// Frames analysed.
    pub n: u32,
}

impl MovementObservation {
    /// `flags[i]` tells whether frames `i` and `i + 1` differ.
    pub fn from_flags(kind: RegionKind, flags: &[bool]) -> Result<Self, MotionError> {
        if flags.is_empty() {
            return Err(MotionError::TooFewFrames(flags.len() + 1));
        }
        Ok(MovementObservation {
            kind,
            c: flags.iter().filter(|&&f| f).count() as u32,
            n: flags.len() as u32 + 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    #[default]
    BlockDifference,
    /// Per-pair flags supplied by the dataset manifest.
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MovementDetectorConfig {
    pub detector: DetectorKind,
    pub mismatch_threshold: f64,
    pub block_size: u32,
}

impl Default for MovementDetectorConfig {
    fn default() -> Self {
        MovementDetectorConfig {
            detector: DetectorKind::BlockDifference,
            mismatch_threshold: 0.12,
            block_size: 4,
        }
    }
}

impl MovementDetectorConfig {
    pub fn validate(&self) -> Result<(), MotionError> {
        if !(self.mismatch_threshold > 0.0 && self.mismatch_threshold < 1.0) {
            return Err(MotionError::InvalidThreshold(self.mismatch_threshold));
        }
        if self.block_size < 2 {
            return Err(MotionError::InvalidBlockSize(self.block_size));
        }
        Ok(())
    }
}

fn block_means(img: &GrayImage, rect: BoxRect, grid_w: u32, grid_h: u32, block: u32) -> Vec<f64> {
    let (bw, bh) = (grid_w / block, grid_h / block);
    let mut sums = vec![0u64; (bw * bh) as usize];
    for gy in 0..grid_h {
        let sy = rect.y + (u64::from(gy) * u64::from(rect.h) / u64::from(grid_h)) as u32;
        for gx in 0..grid_w {
            let sx = rect.x + (u64::from(gx) * u64::from(rect.w) / u64::from(grid_w)) as u32;
            sums[((gy / block) * bw + gx / block) as usize] += u64::from(img.get(sx, sy));
        }
    }
    let area = f64::from(block * block);
    sums.into_iter().map(|s| s as f64 / area).collect()
}

/// Mean normalized absolute difference of block means between two crops.
///
/// Both crops are resampled onto a grid as large as the bigger crop in each
/// direction, rounded up to a multiple of `block_size`, so the result does not
/// depend on the order of the pair.
pub fn pair_difference(
    a: &GrayImage,
    rect_a: BoxRect,
    b: &GrayImage,
    rect_b: BoxRect,
    block_size: u32,
) -> f64 {
    let round_up = |v: u32| v.div_ceil(block_size).max(1) * block_size;
    let grid_w = round_up(rect_a.w.max(rect_b.w));
    let grid_h = round_up(rect_a.h.max(rect_b.h));
    let ma = block_means(a, rect_a, grid_w, grid_h, block_size);
    let mb = block_means(b, rect_b, grid_w, grid_h, block_size);
    let total: f64 = ma.iter().zip(&mb).map(|(x, y)| (x - y).abs() / 255.0).sum();
    total / ma.len() as f64
}

fn check_track(seq: &FrameSequence, track: &RegionTrack) -> Result<(), MotionError> {
    if track.boxes.len() != seq.len() {
        return Err(MotionError::LengthMismatch {
            kind: track.kind,
            boxes: track.boxes.len(),
            frames: seq.len(),
        });
    }
    let (w, h) = seq.dimensions();
    if let Some((index, rect)) = track.boxes.iter().enumerate().find(|(_, r)| !r.fits(w, h)) {
        return Err(MotionError::InvalidTrack { kind: track.kind, index, rect: *rect });
    }
    Ok(())
}

/// Per-pair movement flags from block differences.
pub fn movement_flags(
    seq: &FrameSequence,
    track: &RegionTrack,
    cfg: &MovementDetectorConfig,
) -> Result<Vec<bool>, MotionError> {
    cfg.validate()?;
    check_track(seq, track)?;
    let frames = seq.frames();
    Ok((0..frames.len() - 1)
        .map(|i| {
            let d = pair_difference(
                &frames[i],
                track.boxes[i],
                &frames[i + 1],
                track.boxes[i + 1],
                cfg.block_size,
            );
            d > cfg.mismatch_threshold
        })
        .collect())
}

/// Counts movements with the block-difference detector.
///
/// Manifest-supplied flags (the precomputed detector) are turned into an
/// observation with [`MovementObservation::from_flags`].
pub fn count_movements(
    seq: &FrameSequence,
    track: &RegionTrack,
    cfg: &MovementDetectorConfig,
) -> Result<MovementObservation, MotionError> {
    let flags = movement_flags(seq, track, cfg)?;
    MovementObservation::from_flags(track.kind, &flags)
}
