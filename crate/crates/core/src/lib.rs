//! Face liveness detection with a fuzzy expert system.
//!
//! A sequence of grayscale frames is reduced to three measurements: how often
//! the eye region moves, how often the mouth region moves, and how homogeneous
//! the face texture is (local binary pattern histogram mass around its mode).
//! A Mamdani rule base written in a small `IF ... THEN ...` language turns
//! those into a crisp liveness score, which is thresholded into a verdict.
//!
//! ```
//! use fuzzy_liveness::pipeline::{LivenessEngine, PipelineConfig, Verdict};
//!
//! let engine = LivenessEngine::new(PipelineConfig::default()).unwrap();
//! let score = engine.infer_raw(15, 12, 20, 400.0).unwrap().score;
//! assert_eq!(engine.decide(score).verdict, Verdict::Live);
//! ```

pub mod dataset;
pub mod fuzzy;
pub mod motion;
pub mod pipeline;
pub mod raster;
pub mod rules;
pub mod texture;
