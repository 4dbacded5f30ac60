//! Coarse-mask refinement and evaluation toolkit.
//!
//! Noisy coarse segmentation maps are thresholded, reduced to their largest
//! connected component on a downscaled grid, and turned into box prompts.
//! Four cases at a time are packed into one 2x2 composite for a box-prompted
//! segmenter, whose outputs are split back per case and scored with Dice
//! across target domains.
//!
//! The math is generic over [`Confidence`] (`f32` or `f64`); the aliases
//! below fix the types the pipeline and file formats use.

pub mod compose;
pub mod eval;
pub mod mask;
pub mod pipeline;
pub mod scalar;
pub mod storage;

pub use compose::{CompositeBatch, TileSlot};
pub use eval::{CaseScore, DiceReport};
pub use mask::{BinaryMask, BoundingBox, ComponentLabeling, Connectivity, ProbabilityMap};
pub use pipeline::{PipelineConfig, PipelineError};
pub use scalar::Confidence;

/// Probability map as stored on disk (NPY `<f4`).
pub type ProbMap = ProbabilityMap<f32>;
/// Double-precision probability map.
pub type ProbMap64 = ProbabilityMap<f64>;
/// Case score with `f64` Dice.
pub type Score = CaseScore<f64>;
/// Report with `f64` Dice, as produced by the pipeline.
pub type Report = DiceReport<f64>;
