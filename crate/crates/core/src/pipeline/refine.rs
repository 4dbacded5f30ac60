use crate::mask::{bbox_from_mask, refine_box, threshold, BoundingBox};
use crate::storage::CaseRecord;

use super::{BoxSource, EmptyMaskFallback, PipelineConfig, PipelineError};

/// Prompt box for one case under `cfg.box_source`, applying the empty-mask
/// fallback when nothing survives.
pub fn refine_boxes(case: &CaseRecord, cfg: &PipelineConfig) -> Result<BoundingBox, PipelineError> {
    let (w, h) = case.dims();
    let found = match cfg.box_source {
        BoxSource::FullImage => return Ok(BoundingBox::full(w, h)),
        BoxSource::Gt => bbox_from_mask(&case.gt_mask),
        BoxSource::Filtered | BoxSource::CoarseRaw => {
            let mask = threshold(&case.coarse_map, cfg.theta1 as f32)?;
            refine_box(
                &mask,
                cfg.factor(),
                cfg.connectivity,
                cfg.box_source == BoxSource::Filtered,
            )?
        }
    };
    match (found, cfg.empty_mask_fallback) {
        (Some(b), _) => Ok(b),
        (None, EmptyMaskFallback::FullImageBox) => Ok(BoundingBox::full(w, h)),
        (None, EmptyMaskFallback::SkipCase) => Err(PipelineError::EmptyMask(case.case_id.clone())),
    }
}
