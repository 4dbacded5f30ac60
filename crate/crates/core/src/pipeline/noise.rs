//! Synthetic coarse probability maps: the ground truth at high confidence
//! plus small speckle blobs that also clear the coarse threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mask::{
    bbox_from_mask, label_components, largest_component, BinaryMask, Connectivity, ProbabilityMap,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error(
        "speckle size {speckle_size} is not below the target's largest component ({target_size})"
    )]
    SpeckleTooLarge {
        speckle_size: usize,
        target_size: usize,
    },
    #[error("invalid confidence levels: {0}")]
    InvalidLevels(String),
    #[error("speckle size must be positive")]
    ZeroSpeckle,
    #[error("could not place speckle {0} after {1} attempts")]
    PlacementFailed(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceLevels {
    /// The coarse threshold the other levels are relative to.
    pub theta1: f32,
    /// Target pixels are drawn from `[target_min, 1]`.
    pub target_min: f32,
    /// Speckle pixels are drawn from `[speckle_min, 1]`.
    pub speckle_min: f32,
    /// Background pixels are drawn from `[0, background_max)`.
    pub background_max: f32,
}

impl Default for ConfidenceLevels {
    fn default() -> Self {
        Self {
            theta1: 0.75,
            target_min: 0.85,
            speckle_min: 0.78,
            background_max: 0.6,
        }
    }
}

impl ConfidenceLevels {
    fn validate(&self) -> Result<(), NoiseError> {
        let unit = |v: f32| (0.0..=1.0).contains(&v);
        if ![
            self.theta1,
            self.target_min,
            self.speckle_min,
            self.background_max,
        ]
        .into_iter()
        .all(unit)
        {
            return Err(NoiseError::InvalidLevels(
                "levels must lie in [0, 1]".into(),
            ));
        }
        if self.target_min < self.theta1 || self.speckle_min < self.theta1 {
            return Err(NoiseError::InvalidLevels(
                "target and speckle levels must reach theta1".into(),
            ));
        }
        if self.background_max > self.theta1 {
            return Err(NoiseError::InvalidLevels(
                "background must stay below theta1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SpecklePlacement {
    /// Anywhere not within `min_gap` of other foreground.
    #[default]
    Anywhere,
    /// Additionally outside the ground truth's bounding box.
    OutsideTargetBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub speckle_count: usize,
    /// Pixels per speckle; each speckle is one 4-connected blob.
    pub speckle_size: usize,
    pub levels: ConfidenceLevels,
    pub placement: SpecklePlacement,
    /// Minimum Chebyshev distance minus one between a speckle and any other
    /// foreground pixel.
    pub min_gap: usize,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            speckle_count: 3,
            speckle_size: 4,
            levels: ConfidenceLevels::default(),
            placement: SpecklePlacement::Anywhere,
            min_gap: 8,
            seed: 0,
        }
    }
}

const PLACEMENT_ATTEMPTS: usize = 2000;

/// Coarse map whose `theta1`-thresholded mask is exactly the ground truth
/// plus `speckle_count` separate blobs of `speckle_size` pixels.
pub fn noisy_coarse_map(
    gt: &BinaryMask,
    spec: &NoiseSpec,
) -> Result<ProbabilityMap<f32>, NoiseError> {
    spec.levels.validate()?;
    let speckles = place_speckles(gt, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let l = spec.levels;
    let values = gt
        .bits()
        .iter()
        .zip(speckles.bits())
        .map(|(&target, &speckle)| {
            if target {
                rng.gen_range(l.target_min..=1.0)
            } else if speckle {
                rng.gen_range(l.speckle_min..=1.0)
            } else if l.background_max > 0.0 {
                rng.gen_range(0.0..l.background_max)
            } else {
                0.0
            }
        })
        .collect();
    Ok(ProbabilityMap::new(gt.width(), gt.height(), values).expect("levels validated"))
}

/// Speckle pixels only, as a mask.
pub fn place_speckles(gt: &BinaryMask, spec: &NoiseSpec) -> Result<BinaryMask, NoiseError> {
    let (w, h) = gt.dims();
    let mut speckles = BinaryMask::empty(w, h);
    if spec.speckle_count == 0 {
        return Ok(speckles);
    }
    if spec.speckle_size == 0 {
        return Err(NoiseError::ZeroSpeckle);
    }
    let target_size =
        largest_component(&label_components(gt, Connectivity::Four)).map_or(0, |(_, s)| s);
    if spec.speckle_size >= target_size {
        return Err(NoiseError::SpeckleTooLarge {
            speckle_size: spec.speckle_size,
            target_size,
        });
    }
    let forbidden_box = match spec.placement {
        SpecklePlacement::Anywhere => None,
        SpecklePlacement::OutsideTargetBox => bbox_from_mask(gt),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut occupied = gt.clone();
    for n in 0..spec.speckle_count {
        let near = NeighborhoodIndex::new(&occupied);
        let blob = (0..PLACEMENT_ATTEMPTS)
            .find_map(|_| {
                let blob = grow_blob(&mut rng, w, h, spec.speckle_size)?;
                let ok = blob.iter().all(|&(x, y)| {
                    !near.any_within(x, y, spec.min_gap)
                        && !forbidden_box.is_some_and(|b| b.contains_pixel(x as u32, y as u32))
                });
                ok.then_some(blob)
            })
            .ok_or(NoiseError::PlacementFailed(n, PLACEMENT_ATTEMPTS))?;
        for (x, y) in blob {
            speckles.set(x, y, true);
            occupied.set(x, y, true);
        }
    }
    Ok(speckles)
}

/// Random 4-connected blob of exactly `size` pixels, or `None` if it got stuck.
fn grow_blob(rng: &mut ChaCha8Rng, w: usize, h: usize, size: usize) -> Option<Vec<(usize, usize)>> {
    let mut cells = vec![(rng.gen_range(0..w), rng.gen_range(0..h))];
    let mut tries = 0;
    while cells.len() < size {
        tries += 1;
        if tries > 64 * size {
            return None;
        }
        let (x, y) = cells[rng.gen_range(0..cells.len())];
        let (dx, dy) = [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)][rng.gen_range(0..4)];
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
            continue;
        }
        let next = (nx as usize, ny as usize);
        if !cells.contains(&next) {
            cells.push(next);
        }
    }
    Some(cells)
}

/// Summed-area table over a mask for window-occupancy queries.
struct NeighborhoodIndex {
    width: usize,
    height: usize,
    sums: Vec<u32>,
}

impl NeighborhoodIndex {
    fn new(mask: &BinaryMask) -> Self {
        let (w, h) = mask.dims();
        let mut sums = vec![0u32; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += u32::from(mask.get(x, y));
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Any set pixel with Chebyshev distance `<= gap` from `(x, y)`.
    fn any_within(&self, x: usize, y: usize, gap: usize) -> bool {
        let x0 = x.saturating_sub(gap);
        let y0 = y.saturating_sub(gap);
        let x1 = (x + gap + 1).min(self.width);
        let y1 = (y + gap + 1).min(self.height);
        let s = |xx: usize, yy: usize| self.sums[yy * (self.width + 1) + xx];
        s(x1, y1) + s(x0, y0) > s(x0, y1) + s(x1, y0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::threshold;

    fn disk(s: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(s, s, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
    }

    #[test]
    fn no_speckles_thresholds_to_gt() {
        let gt = disk(64, 30.0, 30.0, 10.0);
        let spec = NoiseSpec {
            speckle_count: 0,
            ..NoiseSpec::default()
        };
        let map = noisy_coarse_map(&gt, &spec).unwrap();
        assert_eq!(threshold(&map, 0.75).unwrap(), gt);
    }

    #[test]
    fn one_two_pixel_speckle_gives_two_components() {
        let gt = disk(64, 30.0, 30.0, 10.0);
        let spec = NoiseSpec {
            speckle_count: 1,
            speckle_size: 2,
            ..NoiseSpec::default()
        };
        let mask = threshold(&noisy_coarse_map(&gt, &spec).unwrap(), 0.75).unwrap();
        let l = label_components(&mask, Connectivity::Eight);
        let mut sizes = l.sizes()[1..].to_vec();
        sizes.sort();
        assert_eq!(sizes, vec![2, gt.count()]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let gt = disk(64, 20.0, 40.0, 9.0);
        let spec = NoiseSpec {
            seed: 42,
            ..NoiseSpec::default()
        };
        let a = noisy_coarse_map(&gt, &spec).unwrap();
        let b = noisy_coarse_map(&gt, &spec).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn speckle_too_large() {
        let gt = disk(32, 16.0, 16.0, 1.0);
        let spec = NoiseSpec {
            speckle_count: 1,
            speckle_size: gt.count(),
            ..NoiseSpec::default()
        };
        assert!(matches!(
            noisy_coarse_map(&gt, &spec),
            Err(NoiseError::SpeckleTooLarge { .. })
        ));
    }

    #[test]
    fn outside_box_placement() {
        let gt = disk(96, 48.0, 48.0, 12.0);
        let spec = NoiseSpec {
            speckle_count: 4,
            speckle_size: 3,
            placement: SpecklePlacement::OutsideTargetBox,
            seed: 7,
            ..NoiseSpec::default()
        };
        let speckles = place_speckles(&gt, &spec).unwrap();
        let b = bbox_from_mask(&gt).unwrap();
        assert_eq!(speckles.count(), 12);
        for y in 0..96 {
            for x in 0..96 {
                if speckles.get(x, y) {
                    assert!(!b.contains_pixel(x as u32, y as u32));
                }
            }
        }
    }

    #[test]
    fn bad_levels_rejected() {
        let gt = disk(32, 16.0, 16.0, 5.0);
        let spec = NoiseSpec {
            levels: ConfidenceLevels {
                speckle_min: 0.5,
                ..ConfidenceLevels::default()
            },
            ..NoiseSpec::default()
        };
        assert!(matches!(
            noisy_coarse_map(&gt, &spec),
            Err(NoiseError::InvalidLevels(_))
        ));
    }
}
