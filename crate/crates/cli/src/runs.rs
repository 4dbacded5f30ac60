//! Dataset-level commands.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use maskprompt::eval::{cross_domain_table, sweep_report};
use maskprompt::pipeline::synth::{generate, SynthSpec};
use maskprompt::pipeline::{
    emit, run_sweep, run_to_dir, score_from_dir, MockNoisySegmenter, MockPerfectSegmenter,
    NoiseSpec, RunLayout, RunSummary, Segmenter, SpecklePlacement,
};
use maskprompt::storage::{self, ingest_domains, render_report, Dataset, ReportFormat};
use maskprompt::{DiceReport, PipelineConfig};

use crate::config::Overrides;
use crate::error::{io, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmenterKind {
    MockPerfect,
    MockNoisy,
    /// Predictions written by a separate process; see `--phase`.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Phase {
    /// Write composites and the prompt manifest, then stop.
    Emit,
    /// Score prediction files against the manifest.
    Score,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, value_enum)]
    pub segmenter: SegmenterKind,
    /// Required with the external segmenter.
    #[arg(long, value_enum)]
    pub phase: Option<Phase>,
    /// Prediction root for the score phase.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Manifest for the score phase; defaults to `<out>/manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// With a mock segmenter, also store its maps under `<out>/predictions`.
    #[arg(long)]
    pub write_predictions: bool,
    #[arg(long)]
    pub theta2: Option<f64>,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn load_dataset(cfg: &PipelineConfig) -> Result<Dataset, Failure> {
    let only: Option<Vec<String>> = (!cfg.target_domains.is_empty()).then(|| {
        let mut d = cfg.target_domains.clone();
        d.push(cfg.source_domain.clone());
        d
    });
    Ok(ingest_domains(&cfg.data_root, only.as_deref())?)
}

fn mock(kind: SegmenterKind, ds: &Dataset, seed: u64) -> Box<dyn Segmenter> {
    match kind {
        SegmenterKind::MockNoisy => Box::new(MockNoisySegmenter::from_dataset(ds, seed)),
        _ => Box::new(MockPerfectSegmenter::from_dataset(ds)),
    }
}

fn note_skipped(summary: &RunSummary) {
    if !summary.skipped.is_empty() {
        eprintln!(
            "note: skipped empty-mask cases: {}",
            summary.skipped.join(", ")
        );
    }
}

pub fn pipeline_cmd(mut cfg: PipelineConfig, a: &PipelineArgs) -> Result<(), Failure> {
    a.overrides.apply(&mut cfg);
    cfg.theta2 = a.theta2.unwrap_or(cfg.theta2);
    cfg.validate()?;
    let phase = match (a.segmenter, a.phase) {
        (SegmenterKind::External, None) => {
            return Err(Failure::Validation(
                "the external segmenter needs --phase emit|score".into(),
            ))
        }
        (SegmenterKind::External, Some(Phase::Score)) if a.predictions.is_none() => {
            return Err(Failure::Validation(
                "--phase score needs --predictions".into(),
            ))
        }
        (SegmenterKind::External, p) => p,
        (_, Some(_)) => {
            return Err(Failure::Validation(
                "--phase applies to the external segmenter".into(),
            ))
        }
        (_, None) => None,
    };
    let ds = load_dataset(&cfg)?;
    let report: DiceReport<f64> = match phase {
        Some(Phase::Emit) => {
            let summary = emit(&cfg, &ds, &a.out)?;
            note_skipped(&summary);
            let prompts: usize = summary
                .manifest
                .composites
                .iter()
                .map(|c| c.boxes.iter().map(Vec::len).sum::<usize>())
                .sum();
            eprintln!(
                "wrote {} composites, {prompts} prompts to {}",
                summary.manifest.composites.len(),
                RunLayout::new(&a.out).manifest().display()
            );
            return Ok(());
        }
        Some(Phase::Score) => {
            let manifest = a
                .manifest
                .clone()
                .unwrap_or_else(|| RunLayout::new(&a.out).manifest());
            let preds = a.predictions.as_deref().expect("checked above");
            score_from_dir(&cfg, &ds, &manifest, preds, &a.out)?
        }
        None => {
            let seg = mock(a.segmenter, &ds, cfg.seed);
            let (report, summary) =
                run_to_dir(&cfg, &ds, seg.as_ref(), &a.out, a.write_predictions)?;
            note_skipped(&summary);
            report
        }
    };
    print!("{}", render_report(&report, ReportFormat::Text));
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated segmenter thresholds, one row each.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,0.9")]
    pub theta2: Vec<f64>,
    /// Comma-separated source domains, one column each; default is every domain.
    #[arg(long, value_delimiter = ',')]
    pub sources: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "mock-noisy")]
    pub segmenter: SegmenterKind,
    /// Also write the grid here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

pub fn sweep_cmd(mut cfg: PipelineConfig, a: &SweepArgs) -> Result<(), Failure> {
    a.overrides.apply(&mut cfg);
    cfg.validate()?;
    for &t in &a.theta2 {
        PipelineConfig {
            theta2: t,
            ..cfg.clone()
        }
        .validate()?;
    }
    if a.segmenter == SegmenterKind::External {
        return Err(Failure::Validation(
            "sweep runs an in-process segmenter".into(),
        ));
    }
    let ds = load_dataset(&cfg)?;
    let sources = match &a.sources {
        Some(s) => s.clone(),
        None => ds.labels().map(String::from).collect(),
    };
    let seg = mock(a.segmenter, &ds, cfg.seed);
    let runs = run_sweep(&cfg, &ds, seg.as_ref(), &a.theta2, &sources)?;
    let grid = sweep_report(&runs)?.render();
    if let Some(out) = &a.out {
        std::fs::write(out, &grid).map_err(|e| io(out, e))?;
    }
    print!("{grid}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON files, one per source domain.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Row label when several reports are combined.
    #[arg(long, default_value = "Method")]
    pub label: String,
}

pub fn report_cmd(a: &ReportArgs) -> Result<(), Failure> {
    let reports = a
        .reports
        .iter()
        .map(|p| storage::read_report(p))
        .collect::<Result<Vec<_>, _>>()?;
    if let [one] = &reports[..] {
        print!("{}", render_report(one, ReportFormat::Text));
    } else {
        print!(
            "{}",
            cross_domain_table(&[(a.label.clone(), reports)])?.render()
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "A,B,C,D,E,F")]
    pub domains: Vec<String>,
    #[arg(long, default_value_t = 16)]
    pub cases: usize,
    #[arg(long, default_value_t = 512)]
    pub tile_size: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Speckles added to each coarse map.
    #[arg(long, default_value_t = 3)]
    pub speckles: usize,
    #[arg(long, default_value_t = 4)]
    pub speckle_size: usize,
    #[arg(long, default_value_t = 8)]
    pub min_gap: usize,
    /// Keep speckles out of the target's bounding box.
    #[arg(long)]
    pub outside_target_box: bool,
}

pub fn synth_cmd(a: &SynthArgs) -> Result<(), Failure> {
    if a.tile_size == 0 {
        return Err(Failure::Validation("tile size must be positive".into()));
    }
    let spec = SynthSpec {
        domains: a.domains.clone(),
        cases_per_domain: a.cases,
        tile_size: a.tile_size,
        noise: NoiseSpec {
            speckle_count: a.speckles,
            speckle_size: a.speckle_size,
            min_gap: a.min_gap,
            placement: if a.outside_target_box {
                SpecklePlacement::OutsideTargetBox
            } else {
                SpecklePlacement::Anywhere
            },
            ..NoiseSpec::default()
        },
        seed: a.seed,
    };
    let ds = generate(&spec)?;
    for case in ds.domains().iter().flat_map(|d| &d.cases) {
        storage::write_case(Path::new(&a.out), case)?;
    }
    eprintln!("wrote {} cases to {}", ds.case_count(), a.out.display());
    Ok(())
}
