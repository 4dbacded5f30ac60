use rayon::prelude::*;

use crate::compose::{merge_tiles, slot_region, split_mask, CompositeBatch, Tile};
use crate::eval::{aggregate, dice, CaseScore, DiceReport};
use crate::mask::{threshold, BinaryMask, ProbabilityMap};
use crate::storage::{Dataset, StorageError};

use super::segmenter::{check_contract, Segmenter, SegmenterError};
use super::{refine_boxes, PipelineConfig, PipelineError};

/// Composites to run plus the cases dropped by the `skip_case` fallback.
#[derive(Debug, Clone)]
pub struct Plan {
    pub composites: Vec<CompositeBatch>,
    pub skipped: Vec<String>,
}

/// Target domains in dataset order, excluding the source.
pub fn target_domains<'a>(
    cfg: &'a PipelineConfig,
    dataset: &'a Dataset,
) -> Result<Vec<&'a str>, PipelineError> {
    if cfg.target_domains.is_empty() {
        return Ok(dataset
            .labels()
            .filter(|d| *d != cfg.source_domain)
            .collect());
    }
    let mut out = Vec::new();
    for d in cfg
        .target_domains
        .iter()
        .filter(|d| **d != cfg.source_domain)
    {
        if dataset.domain(d).is_none() {
            return Err(StorageError::DatasetMissing(cfg.data_root.join(d)).into());
        }
        out.push(d.as_str());
    }
    Ok(out)
}

/// Refines one box per case and packs each target domain, in dataset order,
/// into composites of four.
pub fn plan_composites(cfg: &PipelineConfig, dataset: &Dataset) -> Result<Plan, PipelineError> {
    cfg.validate()?;
    let s = cfg.tile_size as usize;
    let mut composites = Vec::new();
    let mut skipped = Vec::new();
    for domain in target_domains(cfg, dataset)? {
        let split = dataset.domain(domain).expect("checked by target_domains");
        let mut tiles = Vec::with_capacity(split.cases.len());
        for case in &split.cases {
            if case.dims() != (s, s) {
                return Err(PipelineError::TileSize {
                    case_id: case.case_id.clone(),
                    dims: case.dims(),
                    tile_size: cfg.tile_size,
                });
            }
            match refine_boxes(case, cfg) {
                Ok(bbox) => tiles.push(Tile {
                    case_id: case.case_id.clone(),
                    image: case.image.clone(),
                    boxes: vec![bbox],
                }),
                Err(PipelineError::EmptyMask(id)) => skipped.push(id),
                Err(e) => return Err(e),
            }
        }
        for (n, group) in tiles.chunks(4).enumerate() {
            composites.push(merge_tiles(format!("{domain}-{n:04}"), group.to_vec())?);
        }
    }
    Ok(Plan {
        composites,
        skipped,
    })
}

/// Called with every composite and its validated raw maps, e.g. to persist them.
pub type PredictionSink<'a> =
    &'a (dyn Fn(&CompositeBatch, &[ProbabilityMap<f32>]) -> Result<(), PipelineError> + Sync);

/// Segments, validates, thresholds at `theta2`, restricts each map to its
/// box's slot, splits and scores every composite.
pub fn score_composites(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    composites: &[CompositeBatch],
    segmenter: &dyn Segmenter,
    sink: Option<PredictionSink<'_>>,
) -> Result<Vec<CaseScore<f64>>, PipelineError> {
    let work = |c: &CompositeBatch| score_one(cfg, dataset, c, segmenter, sink);
    let per_composite: Vec<Vec<CaseScore<f64>>> = if segmenter.reentrant() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| PipelineError::Pool(e.to_string()))?;
        pool.install(|| composites.par_iter().map(work).collect::<Result<_, _>>())?
    } else {
        composites.iter().map(work).collect::<Result<_, _>>()?
    };
    Ok(per_composite.into_iter().flatten().collect())
}

fn score_one(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    c: &CompositeBatch,
    segmenter: &dyn Segmenter,
    sink: Option<PredictionSink<'_>>,
) -> Result<Vec<CaseScore<f64>>, PipelineError> {
    let maps = segmenter.segment(c).map_err(|e| match e {
        SegmenterError::Contract(detail) => PipelineError::ContractViolation {
            composite_id: c.id().to_owned(),
            detail,
        },
        other => PipelineError::Segmenter {
            composite_id: c.id().to_owned(),
            source: other,
        },
    })?;
    check_contract(c, &maps).map_err(|detail| PipelineError::ContractViolation {
        composite_id: c.id().to_owned(),
        detail,
    })?;
    if let Some(sink) = sink {
        sink(c, &maps)?;
    }

    let side = c.side();
    let mut pred = BinaryMask::empty(side, side);
    for ((slot, _, _), map) in c.prompts().zip(&maps) {
        let mut mask = threshold(map, cfg.theta2 as f32)?;
        mask.retain_inside(&slot_region(slot, c.tile_size()));
        pred.union_with(&mask)?;
    }

    split_mask(&pred, c.slots(), c.tile_size())?
        .into_iter()
        .map(|(case_id, tile_pred)| {
            let case = dataset
                .case(&case_id)
                .ok_or_else(|| PipelineError::UnknownCase(case_id.clone()))?;
            Ok(CaseScore {
                dice: dice(&tile_pred, &case.gt_mask)?,
                source_domain: cfg.source_domain.clone(),
                target_domain: case.domain.clone(),
                case_id,
            })
        })
        .collect()
}

/// Plans, segments and scores every target domain, then aggregates.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    segmenter: &dyn Segmenter,
) -> Result<DiceReport<f64>, PipelineError> {
    let plan = plan_composites(cfg, dataset)?;
    let scores = score_composites(cfg, dataset, &plan.composites, segmenter, None)?;
    Ok(aggregate(scores)?)
}

/// Reports per `theta2`, one per source domain.
pub type SweepRuns = Vec<(f64, Vec<DiceReport<f64>>)>;

/// One report per `(theta2, source)` pair, grouped by threshold; feed to
/// [`crate::eval::sweep_report`] for the grid.
pub fn run_sweep(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    segmenter: &dyn Segmenter,
    thetas: &[f64],
    sources: &[String],
) -> Result<SweepRuns, PipelineError> {
    let mut out = Vec::with_capacity(thetas.len());
    for &theta2 in thetas {
        let mut reports = Vec::with_capacity(sources.len());
        for source in sources {
            let run = PipelineConfig {
                theta2,
                source_domain: source.clone(),
                ..cfg.clone()
            };
            reports.push(run_pipeline(&run, dataset, segmenter)?);
        }
        out.push((theta2, reports));
    }
    Ok(out)
}
