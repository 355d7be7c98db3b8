//! Dataset manifests: labeled frame sequences with eye and mouth regions.
//!
//! ```json
//! {
//!   "sequences": [
//!     {
//!       "id": "live-000",
//!       "label": "live",
//!       "frames": ["live-000/frame_00.pgm", "live-000/frame_01.pgm"],
//!       "regions": {
//!         "eye": { "relative": [0.2, 0.2, 0.6, 0.2] },
//!         "mouth": { "boxes": [[20, 40, 24, 10], [20, 41, 24, 10]] }
//!       },
//!       "movement_flags": { "eye": [true], "mouth": [false] },
//!       "psi": 410.0
//!     }
//!   ]
//! }
//! ```
//!
//! Frame paths are relative to the manifest's directory. `movement_flags`
//! feed the precomputed detector; `psi` replaces the texture measurement when
//! present. With both present, `frames` may be empty.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::{BoxRect, FrameSequence, MotionError, RegionKind, RegionTrack};
use crate::raster::{GrayImage, RasterError};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {source}")]
    Malformed {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("manifest lists no sequences")]
    NoSequences,
    #[error("sequence id `{0}` appears more than once")]
    DuplicateId(String),
    #[error("no sequence with id `{0}`")]
    UnknownSequence(String),
    #[error("sequence `{0}` has no region boxes")]
    MissingRegions(String),
    #[error("frame: {0}")]
    Frame(#[from] RasterError),
    #[error(transparent)]
    Frames(#[from] MotionError),
}

/// Ground-truth class of a sequence. Attacks are split by presentation medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SequenceLabel {
    #[serde(rename = "live")]
    Live,
    #[serde(rename = "attack:photo-laptop")]
    PhotoLaptop,
    #[serde(rename = "attack:photo-paper")]
    PhotoPaper,
    #[serde(rename = "attack:video-hd")]
    VideoHd,
}

impl SequenceLabel {
    pub const ALL: [SequenceLabel; 4] = [
        SequenceLabel::Live,
        SequenceLabel::PhotoLaptop,
        SequenceLabel::PhotoPaper,
        SequenceLabel::VideoHd,
    ];

    pub fn is_live(self) -> bool {
        self == SequenceLabel::Live
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SequenceLabel::Live => "live",
            SequenceLabel::PhotoLaptop => "attack:photo-laptop",
            SequenceLabel::PhotoPaper => "attack:photo-paper",
            SequenceLabel::VideoHd => "attack:video-hd",
        }
    }

    /// Row caption in the per-class accuracy table.
    pub fn caption(self) -> &'static str {
        match self {
            SequenceLabel::Live => "Real person",
            SequenceLabel::PhotoLaptop => "Photo attack (laptop)",
            SequenceLabel::PhotoPaper => "Photo attack (2D paper)",
            SequenceLabel::VideoHd => "HD video attack (mobile)",
        }
    }
}

impl fmt::Display for SequenceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionSpec {
    /// `(x, y, w, h)` as fractions of the frame size, same box in every frame.
    Relative { relative: [f64; 4] },
    /// One absolute box per frame.
    PerFrame { boxes: Vec<BoxRect> },
}

impl RegionSpec {
    pub fn track(&self, kind: RegionKind, frames: usize, width: u32, height: u32) -> RegionTrack {
        match self {
            RegionSpec::Relative { relative } => {
                RegionTrack::fixed(kind, BoxRect::from_relative(*relative, width, height), frames)
            }
            RegionSpec::PerFrame { boxes } => RegionTrack { kind, boxes: boxes.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub eye: RegionSpec,
    pub mouth: RegionSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementFlags {
    pub eye: Vec<bool>,
    pub mouth: Vec<bool>,
}

/// Generator-side truth, kept for oracle checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub c_eye: u32,
    pub c_mouth: u32,
    pub eye_changes: Vec<usize>,
    pub mouth_changes: Vec<usize>,
    pub psi_target: f64,
    pub psi_measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub id: String,
    pub label: SequenceLabel,
    #[serde(default)]
    pub frames: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Regions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub movement_flags: Option<MovementFlags>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sequences: Vec<SequenceEntry>,
}

impl Manifest {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, ManifestError> {
        let manifest: Manifest =
            serde_json::from_str(text).map_err(|source| ManifestError::Malformed {
                path: origin.to_path_buf(),
                source,
            })?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    fn check(&self) -> Result<(), ManifestError> {
        if self.sequences.is_empty() {
            return Err(ManifestError::NoSequences);
        }
        let mut ids: Vec<&str> = self.sequences.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(ManifestError::DuplicateId(w[0].to_string()));
        }
        Ok(())
    }

    pub fn sequence(&self, id: &str) -> Result<&SequenceEntry, ManifestError> {
        self.sequences
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| ManifestError::UnknownSequence(id.to_string()))
    }
}

/// A manifest together with the directory its frame paths are relative to.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: Manifest,
    pub base_dir: PathBuf,
}

impl Dataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest = Manifest::from_json(&text, path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Dataset { manifest, base_dir })
    }
}

/// Loads the frames of one sequence and builds its eye and mouth tracks
/// (in that order). Relative boxes are scaled to the frame size and repeated
/// for every frame.
pub fn load_tracks(
    entry: &SequenceEntry,
    base_dir: &Path,
) -> Result<(FrameSequence, Vec<RegionTrack>), ManifestError> {
    let frames = entry
        .frames
        .iter()
        .map(|p| GrayImage::open(base_dir.join(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let seq = FrameSequence::new(frames)?;
    let regions = entry
        .regions
        .as_ref()
        .ok_or_else(|| ManifestError::MissingRegions(entry.id.clone()))?;
    let (w, h) = seq.dimensions();
    let tracks = vec![
        regions.eye.track(RegionKind::Eye, seq.len(), w, h),
        regions.mouth.track(RegionKind::Mouth, seq.len(), w, h),
    ];
    Ok((seq, tracks))
}
