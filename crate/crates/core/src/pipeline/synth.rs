//! Synthetic multi-domain fixtures: elliptical targets, domain-shifted
//! intensities and speckled coarse maps.

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mask::BinaryMask;
use crate::storage::{CaseRecord, Dataset, DomainSplit};

use super::{noisy_coarse_map, NoiseSpec, PipelineError};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub domains: Vec<String>,
    pub cases_per_domain: usize,
    pub tile_size: u32,
    /// Template for every case; its seed is replaced per case.
    pub noise: NoiseSpec,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            domains: ["A", "B", "C", "D", "E", "F"].map(String::from).to_vec(),
            cases_per_domain: 16,
            tile_size: 512,
            noise: NoiseSpec::default(),
            seed: 0,
        }
    }
}

/// Filled axis-aligned ellipse.
pub fn ellipse(size: usize, cx: f64, cy: f64, rx: f64, ry: f64) -> BinaryMask {
    BinaryMask::from_fn(size, size, |x, y| {
        let dx = (x as f64 + 0.5 - cx) / rx;
        let dy = (y as f64 + 0.5 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    })
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset, PipelineError> {
    let s = spec.tile_size as usize;
    let sf = s as f64;
    let mut domains = Vec::with_capacity(spec.domains.len());
    for (d, label) in spec.domains.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(d as u64 * 0x1000_0001));
        let background = 30 + (d as u8 % 6) * 12;
        let mut cases = Vec::with_capacity(spec.cases_per_domain);
        for n in 0..spec.cases_per_domain {
            let rx = rng.gen_range(sf * 0.08..sf * 0.2);
            let ry = rng.gen_range(sf * 0.08..sf * 0.2);
            let cx = rng.gen_range(sf * 0.3..sf * 0.7);
            let cy = rng.gen_range(sf * 0.3..sf * 0.7);
            let gt = ellipse(s, cx, cy, rx, ry);
            let noise = NoiseSpec {
                seed: rng.gen(),
                ..spec.noise.clone()
            };
            let coarse = noisy_coarse_map(&gt, &noise)?;
            let mut image = GrayImage::new(spec.tile_size, spec.tile_size);
            for (x, y, px) in image.enumerate_pixels_mut() {
                let base = if gt.get(x as usize, y as usize) {
                    background.saturating_add(90)
                } else {
                    background
                };
                *px = Luma([base.saturating_add(rng.gen_range(0..24))]);
            }
            cases.push(CaseRecord::new(
                label,
                &format!("case{n:03}"),
                image,
                coarse,
                gt,
            )?);
        }
        domains.push(DomainSplit {
            label: label.clone(),
            cases,
        });
    }
    Ok(Dataset::from_domains(domains))
}
