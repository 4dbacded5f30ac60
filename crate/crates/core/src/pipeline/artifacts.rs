//! Directory-level runs. Layout under an output directory:
//!
//! ```text
//! manifest.json
//! composites/<composite_id>.png
//! predictions/<composite_id>/<slot>/<box>.npy
//! report.json
//! report.txt
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::compose::CompositeBatch;
use crate::eval::{aggregate, DiceReport};
use crate::mask::ProbabilityMap;
use crate::storage::{
    self, prediction_path, write_report, Dataset, ManifestComposite, PromptManifest, ReportFormat,
    StorageError,
};

use super::{
    plan_composites, score_composites, ConfigError, PipelineConfig, PipelineError,
    PredictionDirSegmenter, Segmenter,
};

#[derive(Debug, Clone)]
pub struct RunLayout {
    root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn composites(&self) -> PathBuf {
        self.root.join("composites")
    }

    pub fn predictions(&self) -> PathBuf {
        self.root.join("predictions")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn report_text(&self) -> PathBuf {
        self.root.join("report.txt")
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: PromptManifest,
    /// Cases dropped by the `skip_case` fallback.
    pub skipped: Vec<String>,
}

fn create_dir(p: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(p).map_err(|source| {
        StorageError::Io {
            path: p.to_owned(),
            source,
        }
        .into()
    })
}

/// Writes composites and the prompt manifest; the first phase of an
/// external-segmenter run.
pub fn emit(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    out: &Path,
) -> Result<RunSummary, PipelineError> {
    let (summary, _) = emit_with_plan(cfg, dataset, out)?;
    Ok(summary)
}

fn emit_with_plan(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    out: &Path,
) -> Result<(RunSummary, Vec<CompositeBatch>), PipelineError> {
    let layout = RunLayout::new(out);
    let plan = plan_composites(cfg, dataset)?;
    create_dir(&layout.composites())?;
    let mut manifest = PromptManifest::new(cfg.tile_size);
    for c in &plan.composites {
        let rel = format!("composites/{}.png", c.id());
        storage::write_gray(&layout.root().join(&rel), c.image())?;
        manifest
            .composites
            .push(ManifestComposite::from_batch(c, rel));
    }
    storage::write_manifest(&layout.manifest(), &manifest)?;
    Ok((
        RunSummary {
            manifest,
            skipped: plan.skipped,
        },
        plan.composites,
    ))
}

fn write_reports(out: &Path, report: &DiceReport<f64>) -> Result<(), PipelineError> {
    let layout = RunLayout::new(out);
    write_report(&layout.report_json(), report, ReportFormat::Structured)?;
    write_report(&layout.report_text(), report, ReportFormat::Text)?;
    Ok(())
}

/// Single-phase run with an in-process segmenter. With `write_predictions`
/// the raw maps are stored under `predictions/` in the layout an external
/// segmenter would use.
pub fn run_to_dir(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    segmenter: &dyn Segmenter,
    out: &Path,
    write_predictions: bool,
) -> Result<(DiceReport<f64>, RunSummary), PipelineError> {
    let (summary, composites) = emit_with_plan(cfg, dataset, out)?;
    let pred_root = RunLayout::new(out).predictions();
    let sink = |c: &CompositeBatch, maps: &[ProbabilityMap<f32>]| -> Result<(), PipelineError> {
        for ((slot, b, _), map) in c.prompts().zip(maps) {
            let path = pred_root.join(prediction_path(c.id(), slot, b));
            create_dir(path.parent().expect("prediction path has a parent"))?;
            storage::write_probmap(&path, map)?;
        }
        Ok(())
    };
    let scores = score_composites(
        cfg,
        dataset,
        &composites,
        segmenter,
        write_predictions.then_some(&sink as _),
    )?;
    let report = aggregate(scores)?;
    write_reports(out, &report)?;
    Ok((report, summary))
}

/// Second phase of an external run: scores the maps in `predictions`
/// against the composites listed in `manifest`.
pub fn score_from_dir(
    cfg: &PipelineConfig,
    dataset: &Dataset,
    manifest_path: &Path,
    predictions: &Path,
    out: &Path,
) -> Result<DiceReport<f64>, PipelineError> {
    cfg.validate()?;
    let manifest = storage::read_manifest(manifest_path)?;
    if manifest.tile_size != cfg.tile_size {
        return Err(ConfigError::Mismatch(format!(
            "manifest tile_size {} differs from config tile_size {}",
            manifest.tile_size, cfg.tile_size
        ))
        .into());
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let composites = manifest
        .composites
        .iter()
        .map(|entry| {
            let image = storage::read_gray(&base.join(&entry.image))?;
            Ok(entry.to_batch(manifest.tile_size, image)?)
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let segmenter = PredictionDirSegmenter::new(predictions);
    let scores = score_composites(cfg, dataset, &composites, &segmenter, None)?;
    let report = aggregate(scores)?;
    create_dir(out)?;
    write_reports(out, &report)?;
    Ok(report)
}
