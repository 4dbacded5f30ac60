//! The box-prompted segmenter boundary and the built-in stand-ins.
//!
//! A segmenter receives one composite with its composite-coordinate boxes
//! and returns one composite-sized probability map per box, in
//! [`CompositeBatch::prompts`] order (slot-major, then box index).

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::compose::{slot_offset, CompositeBatch};
use crate::mask::{BinaryMask, BoundingBox, ProbabilityMap};
use crate::storage::{self, prediction_path, Dataset, StorageError};

#[derive(Debug, Error)]
pub enum SegmenterError {
    #[error("no ground truth for case {0:?}")]
    MissingGroundTruth(String),
    #[error("no predictions for composite {composite_id:?} at {path}")]
    MissingPredictions { composite_id: String, path: PathBuf },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("segmenter failed: {0}")]
    Failed(String),
}

pub trait Segmenter: Sync {
    fn segment(
        &self,
        composite: &CompositeBatch,
    ) -> Result<Vec<ProbabilityMap<f32>>, SegmenterError>;

    /// `false` if calls must not overlap; the pipeline then serializes them.
    fn reentrant(&self) -> bool {
        true
    }
}

/// Checks count and dimensions of a segmenter's output.
pub fn check_contract(
    composite: &CompositeBatch,
    maps: &[ProbabilityMap<f32>],
) -> Result<(), String> {
    let expected = composite.prompt_count();
    if maps.len() != expected {
        return Err(format!(
            "composite {}: {} maps for {} boxes",
            composite.id(),
            maps.len(),
            expected
        ));
    }
    let side = composite.side();
    if let Some((i, m)) = maps
        .iter()
        .enumerate()
        .find(|(_, m)| m.dims() != (side, side))
    {
        return Err(format!(
            "composite {}: map {i} is {:?}, expected {side}x{side}",
            composite.id(),
            m.dims()
        ));
    }
    if let Some(i) = maps
        .iter()
        .position(|m| m.values().iter().any(|v| !(0.0..=1.0).contains(v)))
    {
        return Err(format!(
            "composite {}: map {i} leaves [0, 1]",
            composite.id()
        ));
    }
    Ok(())
}

fn gt_lookup(dataset: &Dataset) -> HashMap<String, BinaryMask> {
    dataset
        .domains()
        .iter()
        .flat_map(|d| &d.cases)
        .map(|c| (c.case_id.clone(), c.gt_mask.clone()))
        .collect()
}

/// Paints a composite map from a per-pixel rule over one slot's box.
fn paint(
    composite: &CompositeBatch,
    slot: usize,
    bbox: &BoundingBox,
    mut value: impl FnMut(usize, usize) -> f32,
) -> ProbabilityMap<f32> {
    let side = composite.side();
    let (ox, oy) = slot_offset(slot, composite.tile_size());
    let region = crate::compose::slot_region(slot, composite.tile_size());
    let mut map = ProbabilityMap::zeros(side, side);
    for y in bbox.y_min()..=bbox.y_max() {
        for x in bbox.x_min()..=bbox.x_max() {
            if region.contains_pixel(x, y) {
                let v = value((x - ox) as usize, (y - oy) as usize);
                if v > 0.0 {
                    map.set(x as usize, y as usize, v);
                }
            }
        }
    }
    map
}

/// Returns 1.0 on ground-truth pixels inside each box (within the box's
/// slot) and 0.0 elsewhere.
#[derive(Debug, Clone, Default)]
pub struct MockPerfectSegmenter {
    gt: HashMap<String, BinaryMask>,
}

impl MockPerfectSegmenter {
    pub fn new(gt: HashMap<String, BinaryMask>) -> Self {
        Self { gt }
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        Self::new(gt_lookup(dataset))
    }
}

impl Segmenter for MockPerfectSegmenter {
    fn segment(&self, c: &CompositeBatch) -> Result<Vec<ProbabilityMap<f32>>, SegmenterError> {
        c.prompts()
            .map(|(slot, _, bbox)| {
                let id = c.slots()[slot]
                    .case_id()
                    .expect("prompts only on filled slots");
                let gt = self
                    .gt
                    .get(id)
                    .ok_or_else(|| SegmenterError::MissingGroundTruth(id.to_owned()))?;
                Ok(paint(
                    c,
                    slot,
                    bbox,
                    |x, y| if gt.get(x, y) { 1.0 } else { 0.0 },
                ))
            })
            .collect()
    }
}

/// A box-sensitive imperfect segmenter.
///
/// Inside each box, ground-truth pixels get one of `tp_levels` and other
/// pixels become clutter at `clutter_level` with probability
/// `clutter_rate`; everything outside the box is 0. Both choices are a pure
/// function of `(seed, case id, tile pixel)`, so a looser box can only add
/// clutter.
#[derive(Debug, Clone)]
pub struct MockNoisySegmenter {
    gt: HashMap<String, BinaryMask>,
    pub seed: u64,
    pub tp_levels: Vec<f32>,
    pub clutter_rate: f64,
    pub clutter_level: f32,
}

impl MockNoisySegmenter {
    pub fn new(gt: HashMap<String, BinaryMask>, seed: u64) -> Self {
        Self {
            gt,
            seed,
            tp_levels: vec![0.6, 0.8, 0.95],
            clutter_rate: 0.1,
            clutter_level: 0.55,
        }
    }

    pub fn from_dataset(dataset: &Dataset, seed: u64) -> Self {
        Self::new(gt_lookup(dataset), seed)
    }

    /// Confidence for tile pixel `(x, y)` of `case_id`, assuming it lies inside the box.
    pub fn confidence(&self, case_id: &str, x: usize, y: usize, is_gt: bool) -> f32 {
        let h = splitmix64(self.seed ^ fnv1a(case_id) ^ ((y as u64) << 32 | x as u64));
        if is_gt {
            self.tp_levels[(h % self.tp_levels.len() as u64) as usize]
        } else {
            let u = (splitmix64(h) >> 11) as f64 / (1u64 << 53) as f64;
            if u < self.clutter_rate {
                self.clutter_level
            } else {
                0.0
            }
        }
    }
}

impl Segmenter for MockNoisySegmenter {
    fn segment(&self, c: &CompositeBatch) -> Result<Vec<ProbabilityMap<f32>>, SegmenterError> {
        c.prompts()
            .map(|(slot, _, bbox)| {
                let id = c.slots()[slot]
                    .case_id()
                    .expect("prompts only on filled slots");
                let gt = self
                    .gt
                    .get(id)
                    .ok_or_else(|| SegmenterError::MissingGroundTruth(id.to_owned()))?;
                Ok(paint(c, slot, bbox, |x, y| {
                    self.confidence(id, x, y, gt.get(x, y))
                }))
            })
            .collect()
    }
}

/// Reads maps written by an external segmenter from
/// `<root>/<composite_id>/<slot>/<box>.npy`.
#[derive(Debug, Clone)]
pub struct PredictionDirSegmenter {
    root: PathBuf,
}

impl PredictionDirSegmenter {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn present_files(&self, dir: &Path) -> Result<BTreeSet<PathBuf>, SegmenterError> {
        let mut found = BTreeSet::new();
        let io = |e: std::io::Error| SegmenterError::Failed(format!("{}: {e}", dir.display()));
        for slot in fs::read_dir(dir).map_err(io)? {
            let slot = slot.map_err(io)?;
            if !slot.path().is_dir() {
                continue;
            }
            for f in fs::read_dir(slot.path()).map_err(io)? {
                let p = f.map_err(io)?.path();
                if p.extension().is_some_and(|e| e == "npy") {
                    found.insert(p);
                }
            }
        }
        Ok(found)
    }
}

impl Segmenter for PredictionDirSegmenter {
    fn segment(&self, c: &CompositeBatch) -> Result<Vec<ProbabilityMap<f32>>, SegmenterError> {
        let dir = self.root.join(c.id());
        if !dir.is_dir() {
            return Err(SegmenterError::MissingPredictions {
                composite_id: c.id().to_owned(),
                path: dir,
            });
        }
        let expected: Vec<PathBuf> = c
            .prompts()
            .map(|(s, b, _)| self.root.join(prediction_path(c.id(), s, b)))
            .collect();
        let found = self.present_files(&dir)?;
        let wanted: BTreeSet<PathBuf> = expected.iter().cloned().collect();
        if found != wanted {
            return Err(SegmenterError::Contract(format!(
                "composite {}: {} prediction files for {} boxes (expected {:?})",
                c.id(),
                found.len(),
                wanted.len(),
                expected
                    .iter()
                    .map(|p| p
                        .strip_prefix(&self.root)
                        .unwrap_or(p)
                        .display()
                        .to_string())
                    .collect::<Vec<_>>()
            )));
        }
        expected
            .iter()
            .map(|p| {
                storage::read_probmap(p).map_err(|e| match e {
                    e if e.is_io() => SegmenterError::Failed(e.to_string()),
                    e @ StorageError::InFile { .. } => SegmenterError::Contract(e.to_string()),
                    other => SegmenterError::Failed(other.to_string()),
                })
            })
            .collect()
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{merge_tiles, Tile};
    use crate::mask::threshold;
    use image::GrayImage;

    fn gt() -> BinaryMask {
        BinaryMask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (1..5).contains(&y))
    }

    fn composite(bbox: BoundingBox) -> CompositeBatch {
        merge_tiles(
            "B-0000",
            vec![
                Tile {
                    case_id: "B/a".into(),
                    image: GrayImage::new(8, 8),
                    boxes: vec![],
                },
                Tile {
                    case_id: "B/b".into(),
                    image: GrayImage::new(8, 8),
                    boxes: vec![bbox],
                },
            ],
        )
        .unwrap()
    }

    fn perfect() -> MockPerfectSegmenter {
        MockPerfectSegmenter::new(HashMap::from([("B/a".into(), gt()), ("B/b".into(), gt())]))
    }

    #[test]
    fn perfect_reproduces_gt_inside_box() {
        let c = composite(BoundingBox::full(8, 8));
        let maps = perfect().segment(&c).unwrap();
        assert_eq!(maps.len(), 1);
        check_contract(&c, &maps).unwrap();
        for theta in [0.1f32, 0.5, 1.0] {
            let m = threshold(&maps[0], theta).unwrap();
            assert_eq!(m.crop(8, 0, 8, 8), gt());
            assert_eq!(m.count(), gt().count());
        }
    }

    #[test]
    fn perfect_clips_to_box() {
        let c = composite(BoundingBox::new(0, 0, 3, 7).unwrap());
        let maps = perfect().segment(&c).unwrap();
        let tile = threshold(&maps[0], 0.5).unwrap().crop(8, 0, 8, 8);
        // gt columns 2..6 clipped to 0..=3 leaves 2 columns of 4 rows
        assert_eq!(tile.count(), 8);
        let d: f64 = crate::eval::dice(&tile, &gt()).unwrap();
        assert_eq!(d, 2.0 * 8.0 / (8.0 + 16.0));
    }

    #[test]
    fn perfect_blank_quadrants_stay_zero() {
        let c = composite(BoundingBox::full(8, 8));
        let map = &perfect().segment(&c).unwrap()[0];
        for (x0, y0) in [(0, 0), (0, 8), (8, 8)] {
            assert!(map.crop(x0, y0, 8, 8).values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn missing_gt_reported() {
        let c = composite(BoundingBox::full(8, 8));
        let seg = MockPerfectSegmenter::new(HashMap::new());
        assert!(matches!(
            seg.segment(&c),
            Err(SegmenterError::MissingGroundTruth(_))
        ));
    }

    #[test]
    fn noisy_is_deterministic_and_box_monotone() {
        let mut seg = MockNoisySegmenter::new(
            HashMap::from([("B/a".into(), gt()), ("B/b".into(), gt())]),
            3,
        );
        seg.clutter_rate = 0.5;
        let tight = composite(BoundingBox::new(2, 1, 5, 4).unwrap());
        let loose = composite(BoundingBox::full(8, 8));
        let a = seg.segment(&tight).unwrap();
        assert_eq!(a, seg.segment(&tight).unwrap());
        let b = seg.segment(&loose).unwrap();
        let ta = threshold(&a[0], 0.5).unwrap();
        let tb = threshold(&b[0], 0.5).unwrap();
        assert!(ta.is_subset_of(&tb));
        assert!(tb.count() > ta.count());
    }

    #[test]
    fn contract_counts_and_dims() {
        let c = composite(BoundingBox::full(8, 8));
        assert!(check_contract(&c, &[]).is_err());
        assert!(check_contract(&c, &[ProbabilityMap::zeros(8, 8)]).is_err());
        assert!(check_contract(&c, &[ProbabilityMap::zeros(16, 16)]).is_ok());
    }
}
