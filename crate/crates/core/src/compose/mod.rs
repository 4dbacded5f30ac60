//! 2x2 compositing: four `S`x`S` tiles packed into one `2S`x`2S` image so a
//! fixed-size encoder sees four cases per pass, plus the inverse split.
//!
//! Slots are row-major: 0 = top-left, 1 = top-right, 2 = bottom-left,
//! 3 = bottom-right. Missing tiles become blank slots with zero pixels and
//! no boxes.

use image::GrayImage;
use thiserror::Error;

use crate::mask::{BinaryMask, BoundingBox, ProbabilityMap};
use crate::scalar::Confidence;

pub const SLOTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("a composite holds 1 to 4 tiles, got {0}")]
    TileCount(usize),
    #[error("tile {index} is {width}x{height}, expected {tile_size}x{tile_size}")]
    MixedTileSizes {
        index: usize,
        width: u32,
        height: u32,
        tile_size: u32,
    },
    #[error("expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("box {bbox} lies outside slot {slot}")]
    ContainmentViolation { slot: usize, bbox: BoundingBox },
    #[error("blank slot {0} carries boxes")]
    BoxesOnBlankSlot(usize),
    #[error("slot index {0} out of range")]
    SlotIndex(usize),
    #[error("tile size must be positive")]
    ZeroTileSize,
}

/// One quadrant of a composite. `case_id == None` marks a padding slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TileSlot {
    index: usize,
    case_id: Option<String>,
}

impl TileSlot {
    pub fn new(index: usize, case_id: Option<String>) -> Result<Self, ComposeError> {
        if index >= SLOTS {
            return Err(ComposeError::SlotIndex(index));
        }
        Ok(Self { index, case_id })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn case_id(&self) -> Option<&str> {
        self.case_id.as_deref()
    }

    pub fn is_blank(&self) -> bool {
        self.case_id.is_none()
    }

    /// `(x, y)` of the slot's top-left pixel in the composite.
    pub fn offset(&self, tile_size: u32) -> (u32, u32) {
        slot_offset(self.index, tile_size)
    }
}

pub fn slot_offset(index: usize, tile_size: u32) -> (u32, u32) {
    (
        (index % 2) as u32 * tile_size,
        (index / 2) as u32 * tile_size,
    )
}

/// The slot's quadrant as a composite-coordinate box.
pub fn slot_region(index: usize, tile_size: u32) -> BoundingBox {
    let (x, y) = slot_offset(index, tile_size);
    BoundingBox::new(x, y, x + tile_size - 1, y + tile_size - 1).expect("positive tile size")
}

/// Input to [`merge_tiles`]: an image plus tile-local boxes.
#[derive(Debug, Clone)]
pub struct Tile {
    pub case_id: String,
    pub image: GrayImage,
    pub boxes: Vec<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeBatch {
    id: String,
    tile_size: u32,
    slots: [TileSlot; SLOTS],
    image: GrayImage,
    boxes: [Vec<BoundingBox>; SLOTS],
}

impl CompositeBatch {
    /// Assembles a composite from already-remapped parts, checking every
    /// geometric invariant.
    pub fn from_parts(
        id: impl Into<String>,
        tile_size: u32,
        slots: [TileSlot; SLOTS],
        image: GrayImage,
        boxes: [Vec<BoundingBox>; SLOTS],
    ) -> Result<Self, ComposeError> {
        if tile_size == 0 {
            return Err(ComposeError::ZeroTileSize);
        }
        let side = 2 * tile_size as usize;
        let dims = (image.width() as usize, image.height() as usize);
        if dims != (side, side) {
            return Err(ComposeError::DimensionMismatch {
                expected: (side, side),
                actual: dims,
            });
        }
        for (k, slot) in slots.iter().enumerate() {
            if slot.index != k {
                return Err(ComposeError::SlotIndex(slot.index));
            }
        }
        validate_boxes(tile_size, &slots, &boxes)?;
        Ok(Self {
            id: id.into(),
            tile_size,
            slots,
            image,
            boxes,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tile_size(&self) -> u32 {
        self.tile_size
    }

    /// Side length of the square composite, `2 * tile_size`.
    pub fn side(&self) -> usize {
        2 * self.tile_size as usize
    }

    pub fn slots(&self) -> &[TileSlot; SLOTS] {
        &self.slots
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    /// Composite-coordinate boxes per slot.
    pub fn boxes(&self) -> &[Vec<BoundingBox>; SLOTS] {
        &self.boxes
    }

    /// `(slot, box_index, box)` for every box, slot-major.
    pub fn prompts(&self) -> impl Iterator<Item = (usize, usize, &BoundingBox)> {
        self.boxes
            .iter()
            .enumerate()
            .flat_map(|(s, bs)| bs.iter().enumerate().map(move |(b, bx)| (s, b, bx)))
    }

    pub fn prompt_count(&self) -> usize {
        self.boxes.iter().map(Vec::len).sum()
    }

    /// Boxes of one slot translated back to tile coordinates.
    pub fn tile_boxes(&self, slot: usize) -> Vec<BoundingBox> {
        let (dx, dy) = slot_offset(slot, self.tile_size);
        self.boxes[slot]
            .iter()
            .map(|b| b.translate_back(dx, dy).expect("box inside its slot"))
            .collect()
    }

    /// Pixels of one slot.
    pub fn tile_image(&self, slot: usize) -> GrayImage {
        let (x, y) = slot_offset(slot, self.tile_size);
        image::imageops::crop_imm(&self.image, x, y, self.tile_size, self.tile_size).to_image()
    }
}

fn validate_boxes(
    tile_size: u32,
    slots: &[TileSlot; SLOTS],
    boxes: &[Vec<BoundingBox>; SLOTS],
) -> Result<(), ComposeError> {
    for (k, bs) in boxes.iter().enumerate() {
        if slots[k].is_blank() && !bs.is_empty() {
            return Err(ComposeError::BoxesOnBlankSlot(k));
        }
        let region = slot_region(k, tile_size);
        if let Some(b) = bs.iter().find(|b| !region.contains(b)) {
            return Err(ComposeError::ContainmentViolation { slot: k, bbox: *b });
        }
    }
    Ok(())
}

/// Packs 1 to 4 equally sized square tiles into one composite, in slot order.
pub fn merge_tiles(
    id: impl Into<String>,
    tiles: Vec<Tile>,
) -> Result<CompositeBatch, ComposeError> {
    if tiles.is_empty() || tiles.len() > SLOTS {
        return Err(ComposeError::TileCount(tiles.len()));
    }
    let s = tiles[0].image.width();
    if s == 0 {
        return Err(ComposeError::ZeroTileSize);
    }
    for (index, t) in tiles.iter().enumerate() {
        if t.image.width() != s || t.image.height() != s {
            return Err(ComposeError::MixedTileSizes {
                index,
                width: t.image.width(),
                height: t.image.height(),
                tile_size: s,
            });
        }
    }

    let mut image = GrayImage::new(2 * s, 2 * s);
    let mut slots: [TileSlot; SLOTS] = std::array::from_fn(|k| TileSlot {
        index: k,
        case_id: None,
    });
    let mut boxes: [Vec<BoundingBox>; SLOTS] = Default::default();
    for (k, tile) in tiles.into_iter().enumerate() {
        let (dx, dy) = slot_offset(k, s);
        if let Some(b) = tile
            .boxes
            .iter()
            .find(|b| !b.fits_within(s as usize, s as usize))
        {
            return Err(ComposeError::ContainmentViolation { slot: k, bbox: *b });
        }
        image::imageops::replace(&mut image, &tile.image, dx.into(), dy.into());
        boxes[k] = tile.boxes.iter().map(|b| b.translate(dx, dy)).collect();
        slots[k].case_id = Some(tile.case_id);
    }
    CompositeBatch::from_parts(id, s, slots, image, boxes)
}

/// Places a tile mask into its slot's quadrant of an otherwise empty composite mask.
pub fn remap_mask_to_slot(
    mask: &BinaryMask,
    slot: usize,
    tile_size: u32,
) -> Result<BinaryMask, ComposeError> {
    let s = tile_size as usize;
    if mask.dims() != (s, s) {
        return Err(ComposeError::DimensionMismatch {
            expected: (s, s),
            actual: mask.dims(),
        });
    }
    if slot >= SLOTS {
        return Err(ComposeError::SlotIndex(slot));
    }
    let (dx, dy) = slot_offset(slot, tile_size);
    let mut out = BinaryMask::empty(2 * s, 2 * s);
    out.paste(mask, dx as usize, dy as usize);
    Ok(out)
}

/// Crops the quadrant of every non-blank slot, keyed by case id.
pub fn split_composite<T: Confidence>(
    pred: &ProbabilityMap<T>,
    slots: &[TileSlot; SLOTS],
    tile_size: u32,
) -> Result<Vec<(String, ProbabilityMap<T>)>, ComposeError> {
    check_composite_dims(pred.dims(), tile_size)?;
    let s = tile_size as usize;
    Ok(non_blank(slots)
        .map(|(slot, id)| {
            let (x, y) = slot_offset(slot.index, tile_size);
            (id.to_owned(), pred.crop(x as usize, y as usize, s, s))
        })
        .collect())
}

/// [`split_composite`] for binary predictions.
pub fn split_mask(
    pred: &BinaryMask,
    slots: &[TileSlot; SLOTS],
    tile_size: u32,
) -> Result<Vec<(String, BinaryMask)>, ComposeError> {
    check_composite_dims(pred.dims(), tile_size)?;
    let s = tile_size as usize;
    Ok(non_blank(slots)
        .map(|(slot, id)| {
            let (x, y) = slot_offset(slot.index, tile_size);
            (id.to_owned(), pred.crop(x as usize, y as usize, s, s))
        })
        .collect())
}

fn non_blank(slots: &[TileSlot; SLOTS]) -> impl Iterator<Item = (&TileSlot, &str)> {
    slots
        .iter()
        .filter_map(|s| s.case_id.as_deref().map(|id| (s, id)))
}

fn check_composite_dims(dims: (usize, usize), tile_size: u32) -> Result<(), ComposeError> {
    let side = 2 * tile_size as usize;
    if dims != (side, side) {
        return Err(ComposeError::DimensionMismatch {
            expected: (side, side),
            actual: dims,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    fn tile(id: &str, s: u32, fill: u8, boxes: Vec<BoundingBox>) -> Tile {
        Tile {
            case_id: id.into(),
            image: GrayImage::from_pixel(s, s, Luma([fill])),
            boxes,
        }
    }

    #[test]
    fn four_512_tiles_make_1024() {
        let tiles = (0..4)
            .map(|k| tile(&format!("c{k}"), 512, k as u8 + 1, vec![]))
            .collect();
        let c = merge_tiles("x", tiles).unwrap();
        assert_eq!(c.image().dimensions(), (1024, 1024));
        assert_eq!(c.image().get_pixel(600, 600).0[0], 4);
        assert_eq!(c.image().get_pixel(600, 10).0[0], 2);
        assert_eq!(c.image().get_pixel(10, 600).0[0], 3);
    }

    #[test]
    fn one_tile_pads_with_blanks() {
        let b = BoundingBox::new(0, 0, 3, 3).unwrap();
        let c = merge_tiles("x", vec![tile("a", 8, 9, vec![b])]).unwrap();
        assert!(!c.slots()[0].is_blank());
        for k in 1..4 {
            assert!(c.slots()[k].is_blank());
            assert!(c.boxes()[k].is_empty());
            assert!(c.tile_image(k).pixels().all(|p| p.0[0] == 0));
        }
    }

    #[test]
    fn slot_three_box_offset() {
        let b = BoundingBox::new(10, 20, 30, 40).unwrap();
        let tiles = (0..4)
            .map(|k| {
                tile(
                    &format!("c{k}"),
                    512,
                    0,
                    if k == 3 { vec![b] } else { vec![] },
                )
            })
            .collect();
        let c = merge_tiles("x", tiles).unwrap();
        assert_eq!(
            c.boxes()[3],
            vec![BoundingBox::new(522, 532, 542, 552).unwrap()]
        );
        assert_eq!(c.tile_boxes(3), vec![b]);
    }

    #[test]
    fn mixed_sizes_rejected() {
        let tiles = vec![tile("a", 8, 0, vec![]), tile("b", 4, 0, vec![])];
        assert!(matches!(
            merge_tiles("x", tiles),
            Err(ComposeError::MixedTileSizes { index: 1, .. })
        ));
        assert!(matches!(
            merge_tiles("x", vec![]),
            Err(ComposeError::TileCount(0))
        ));
    }

    #[test]
    fn tile_box_outside_tile_rejected() {
        let b = BoundingBox::new(0, 0, 8, 3).unwrap();
        assert!(matches!(
            merge_tiles("x", vec![tile("a", 8, 0, vec![b])]),
            Err(ComposeError::ContainmentViolation { .. })
        ));
    }

    #[test]
    fn remap_slot_zero_and_two() {
        let m = BinaryMask::from_fn(4, 4, |x, y| x == 1 && y == 2);
        let r0 = remap_mask_to_slot(&m, 0, 4).unwrap();
        assert_eq!(r0.crop(0, 0, 4, 4), m);
        assert_eq!(r0.count(), 1);
        let r2 = remap_mask_to_slot(&m, 2, 4).unwrap();
        assert!(r2.get(1, 2 + 4));
        assert_eq!(r2.count(), 1);
        let empty = remap_mask_to_slot(&BinaryMask::empty(4, 4), 3, 4).unwrap();
        assert!(!empty.has_foreground());
        assert!(matches!(
            remap_mask_to_slot(&m, 0, 8),
            Err(ComposeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn split_only_non_blank() {
        let slots = [
            TileSlot::new(0, None).unwrap(),
            TileSlot::new(1, Some("b".into())).unwrap(),
            TileSlot::new(2, None).unwrap(),
            TileSlot::new(3, None).unwrap(),
        ];
        let pred =
            ProbabilityMap::<f32>::from_fn(4, 4, |x, y| if x >= 2 && y < 2 { 1.0 } else { 0.0 })
                .unwrap();
        let out = split_composite(&pred, &slots, 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, "b");
        assert!(out[0].1.values().iter().all(|&v| v == 1.0));
        assert!(split_composite(&pred, &slots, 3).is_err());
    }

    #[test]
    fn checkerboard_split_matches_direct_crops() {
        let s = 6u32;
        let slots: [TileSlot; 4] =
            std::array::from_fn(|k| TileSlot::new(k, Some(format!("c{k}"))).unwrap());
        let pred = ProbabilityMap::<f64>::from_fn(12, 12, |x, y| ((x + y) % 2) as f64).unwrap();
        let out = split_composite(&pred, &slots, s).unwrap();
        for (k, (id, tile)) in out.iter().enumerate() {
            assert_eq!(id, &format!("c{k}"));
            let (ox, oy) = ((k % 2) * 6, (k / 2) * 6);
            for y in 0..6 {
                for x in 0..6 {
                    assert_eq!(tile.get(x, y), ((x + ox + y + oy) % 2) as f64);
                }
            }
        }
    }
}
