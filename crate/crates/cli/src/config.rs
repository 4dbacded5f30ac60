use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use maskprompt::pipeline::{BoxSource, ConfigError, EmptyMaskFallback};
use maskprompt::{Connectivity, PipelineConfig};

use crate::error::{io, Failure};

/// Flags that override fields of the loaded configuration.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Dataset root holding one directory per domain.
    #[arg(long)]
    pub data_root: Option<PathBuf>,
    /// Source domain, excluded from evaluation.
    #[arg(long)]
    pub source: Option<String>,
    /// Comma-separated target domains; default is every other domain.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<String>>,
    /// filtered, coarse_raw, gt or full_image.
    #[arg(long)]
    pub box_source: Option<BoxSource>,
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub factor: Option<u32>,
    /// 4 or 8.
    #[arg(long)]
    pub connectivity: Option<Connectivity>,
    #[arg(long)]
    pub tile_size: Option<u32>,
    /// full_image_box or skip_case.
    #[arg(long)]
    pub fallback: Option<EmptyMaskFallback>,
    /// Worker threads; 0 picks automatically.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = &self.$flag {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(
            data_root => data_root,
            source => source_domain,
            targets => target_domains,
            box_source => box_source,
            theta1 => theta1,
            factor => downscale_factor,
            connectivity => connectivity,
            tile_size => tile_size,
            fallback => empty_mask_fallback,
            jobs => jobs,
            seed => seed
        );
    }
}

/// Defaults, then the config file if any.
pub fn load(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())).into())
}
