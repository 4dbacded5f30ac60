use std::num::NonZeroU32;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Connectivity;

/// Where the prompt box of a case comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSource {
    /// Threshold, downscale, keep the largest component, box, rescale.
    #[default]
    Filtered,
    /// As `Filtered` without the largest-component step.
    CoarseRaw,
    /// Tight box of the ground-truth mask (upper bound).
    Gt,
    /// The whole image.
    FullImage,
}

impl BoxSource {
    pub const ALL: [BoxSource; 4] = [
        BoxSource::Filtered,
        BoxSource::CoarseRaw,
        BoxSource::Gt,
        BoxSource::FullImage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoxSource::Filtered => "filtered",
            BoxSource::CoarseRaw => "coarse_raw",
            BoxSource::Gt => "gt",
            BoxSource::FullImage => "full_image",
        }
    }
}

impl std::str::FromStr for BoxSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoxSource::ALL
            .into_iter()
            .find(|b| b.name() == s.replace('-', "_"))
            .ok_or_else(|| ConfigError::UnknownValue("box_source", s.to_owned()))
    }
}

/// What to do when refinement leaves no foreground.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyMaskFallback {
    #[default]
    FullImageBox,
    SkipCase,
}

impl std::str::FromStr for EmptyMaskFallback {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "full_image_box" => Ok(EmptyMaskFallback::FullImageBox),
            "skip_case" => Ok(EmptyMaskFallback::SkipCase),
            _ => Err(ConfigError::UnknownValue(
                "empty_mask_fallback",
                s.to_owned(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} = {1} is outside [0, 1]")]
    Threshold(&'static str, f64),
    #[error("downscale_factor must be at least 1")]
    ZeroFactor,
    #[error("tile_size must be positive")]
    ZeroTileSize,
    #[error("downscale_factor {factor} does not divide tile_size {tile_size}")]
    FactorDoesNotDivide { factor: u32, tile_size: u32 },
    #[error("unknown {0} {1:?}")]
    UnknownValue(&'static str, String),
    #[error("cannot read config: {0}")]
    Parse(String),
    #[error("{0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Coarse-map threshold.
    pub theta1: f64,
    /// Segmenter-output threshold.
    pub theta2: f64,
    pub downscale_factor: u32,
    pub connectivity: Connectivity,
    pub tile_size: u32,
    pub box_source: BoxSource,
    pub empty_mask_fallback: EmptyMaskFallback,
    pub source_domain: String,
    /// Empty means every dataset domain except the source.
    pub target_domains: Vec<String>,
    pub data_root: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            theta1: 0.75,
            theta2: 0.5,
            downscale_factor: 4,
            connectivity: Connectivity::Four,
            tile_size: 512,
            box_source: BoxSource::Filtered,
            empty_mask_fallback: EmptyMaskFallback::FullImageBox,
            source_domain: "A".into(),
            target_domains: Vec::new(),
            data_root: PathBuf::from("data"),
            jobs: 0,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_thresholds()?;
        if self.tile_size == 0 {
            return Err(ConfigError::ZeroTileSize);
        }
        if !self.tile_size.is_multiple_of(self.downscale_factor) {
            return Err(ConfigError::FactorDoesNotDivide {
                factor: self.downscale_factor,
                tile_size: self.tile_size,
            });
        }
        Ok(())
    }

    /// Thresholds and factor only, for stages applied to a single file.
    pub fn validate_thresholds(&self) -> Result<(), ConfigError> {
        for (name, v) in [("theta1", self.theta1), ("theta2", self.theta2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Threshold(name, v));
            }
        }
        if self.downscale_factor == 0 {
            return Err(ConfigError::ZeroFactor);
        }
        Ok(())
    }

    pub fn factor(&self) -> NonZeroU32 {
        NonZeroU32::new(self.downscale_factor).expect("validated factor")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let c = PipelineConfig::default();
        assert_eq!((c.theta1, c.theta2), (0.75, 0.5));
        assert_eq!((c.downscale_factor, c.tile_size), (4, 512));
        c.validate().unwrap();
    }

    #[test]
    fn json_partial_override() {
        let c = PipelineConfig::from_json(
            r#"{"theta2": 0.9, "box_source": "coarse_raw", "connectivity": 8}"#,
        )
        .unwrap();
        assert_eq!(c.theta2, 0.9);
        assert_eq!(c.box_source, BoxSource::CoarseRaw);
        assert_eq!(c.connectivity, Connectivity::Eight);
        assert_eq!(c.theta1, 0.75);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(
            PipelineConfig::from_json(r#"{"theta1": 1.2}"#),
            Err(ConfigError::Threshold("theta1", _))
        ));
        assert!(matches!(
            PipelineConfig::from_json(r#"{"downscale_factor": 0}"#),
            Err(ConfigError::ZeroFactor)
        ));
        assert!(matches!(
            PipelineConfig::from_json(r#"{"tile_size": 100, "downscale_factor": 3}"#),
            Err(ConfigError::FactorDoesNotDivide { .. })
        ));
        assert!(matches!(
            PipelineConfig::from_json(r#"{"bogus": 1}"#),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn box_source_names() {
        for b in BoxSource::ALL {
            assert_eq!(b.name().parse::<BoxSource>().unwrap(), b);
            assert_eq!(
                serde_json::to_string(&b).unwrap(),
                format!("\"{}\"", b.name())
            );
        }
        assert_eq!(
            "full-image".parse::<BoxSource>().unwrap(),
            BoxSource::FullImage
        );
        assert!("resnet".parse::<BoxSource>().is_err());
    }
}
