use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::fuzzy::{InferenceMode, VariableSet, EYE, MOUTH, OUTPUT, QUALITY};
use crate::motion::MovementDetectorConfig;
use crate::rules::default_aliases;
use crate::texture::TextureConfig;

/// Which frames feed the texture measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameSelection {
    /// The frame at index `(n - 1) / 2`.
    #[default]
    Median,
    /// Average of the per-frame measurements.
    Mean,
}

/// Everything the liveness pipeline can be tuned with. Loaded from TOML:
///
/// ```toml
/// mode = "paper-hybrid"          # or "standard-mamdani"
/// threshold = 0.5
/// cog_step = 0.001
/// rules = "rules.txt"            # relative to this file; built-in base if absent
/// frame_selection = "median"     # or "mean"
///
/// [texture]
/// window = { kind = "modal", half_width = 8 }   # or { kind = "fixed", k = 240, l = 255 }
/// normalize_to = 1300.0
/// operand = "lbp"                # or "intensity"
///
/// [detector]
/// detector = "block-difference"  # or "precomputed"
/// mismatch_threshold = 0.12
/// block_size = 4
///
/// [aliases]
/// "eye movement" = "eye"
/// ```
///
/// Linguistic variables can be overridden with a `[variables]` table holding
/// `inputs` (eye, mouth, quality) and `output`, each with `name`, `domain`,
/// and `poor` / `average` / `good` trapezoid corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: InferenceMode,
    pub threshold: f64,
    pub cog_step: f64,
    pub rules: Option<PathBuf>,
    pub frame_selection: FrameSelection,
    pub texture: TextureConfig,
    pub detector: MovementDetectorConfig,
    pub aliases: BTreeMap<String, String>,
    pub variables: Option<VariableSet>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: InferenceMode::PaperHybrid,
            threshold: 0.5,
            cog_step: 0.001,
            rules: None,
            frame_selection: FrameSelection::Median,
            texture: TextureConfig::default(),
            detector: MovementDetectorConfig::default(),
            aliases: default_aliases(),
            variables: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file; a relative `rules` path is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = PipelineConfig::from_toml(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(rules), Some(dir)) = (&cfg.rules, path.parent()) {
            if rules.is_relative() {
                cfg.rules = Some(dir.join(rules));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(PipelineError::Config(format!(
                "threshold {} must lie in [0, 1]",
                self.threshold
            )));
        }
        if !(self.cog_step > 0.0 && self.cog_step.is_finite()) {
            return Err(PipelineError::Config(format!(
                "cog_step {} must be positive",
                self.cog_step
            )));
        }
        self.detector
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(vars) = &self.variables {
            for name in [EYE, MOUTH, QUALITY] {
                if vars.input(name).is_none() {
                    return Err(PipelineError::Config(format!("variables: missing input `{name}`")));
                }
            }
            if vars.output.name() != OUTPUT {
                return Err(PipelineError::Config(format!(
                    "variables: output must be named `{OUTPUT}`"
                )));
            }
        }
        Ok(())
    }
}
