//! End-to-end flow: coarse threshold, largest-component filter, box
//! refinement, 2x2 merge, segmenter call, output threshold, split, Dice.

mod artifacts;
mod config;
mod noise;
mod refine;
mod run;
mod segmenter;
pub mod synth;

use thiserror::Error;

use crate::compose::ComposeError;
use crate::eval::EvalError;
use crate::mask::MaskError;
use crate::storage::StorageError;

pub use crate::storage::CaseRecord;
pub use artifacts::{emit, run_to_dir, score_from_dir, RunLayout, RunSummary};
pub use config::{BoxSource, ConfigError, EmptyMaskFallback, PipelineConfig};
pub use noise::{
    noisy_coarse_map, place_speckles, ConfidenceLevels, NoiseError, NoiseSpec, SpecklePlacement,
};
pub use refine::refine_boxes;
pub use run::{
    plan_composites, run_pipeline, run_sweep, score_composites, target_domains, Plan,
    PredictionSink, SweepRuns,
};
pub use segmenter::{
    check_contract, MockNoisySegmenter, MockPerfectSegmenter, PredictionDirSegmenter, Segmenter,
    SegmenterError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("case {0}: no foreground left after refinement")]
    EmptyMask(String),
    #[error("case {case_id} is {dims:?}, tile size is {tile_size}")]
    TileSize {
        case_id: String,
        dims: (usize, usize),
        tile_size: u32,
    },
    #[error("composite {composite_id}: {source}")]
    Segmenter {
        composite_id: String,
        #[source]
        source: SegmenterError,
    },
    #[error("segmenter contract violation in composite {composite_id}: {detail}")]
    ContractViolation {
        composite_id: String,
        detail: String,
    },
    #[error("case {0:?} is not in the dataset")]
    UnknownCase(String),
    #[error("worker pool: {0}")]
    Pool(String),
}
