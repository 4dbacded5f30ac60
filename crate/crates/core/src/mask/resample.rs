use std::num::NonZeroU32;

use super::{
    bbox_from_mask, label_components, largest_component, largest_component_filter, BinaryMask,
    BoundingBox, Connectivity, MaskError,
};

/// OR-pools every `factor`x`factor` block into one pixel.
pub fn downscale_mask(mask: &BinaryMask, factor: NonZeroU32) -> Result<BinaryMask, MaskError> {
    let f = factor.get() as usize;
    let (w, h) = mask.dims();
    if w % f != 0 || h % f != 0 {
        return Err(MaskError::NonDivisibleFactor {
            factor: factor.get(),
            width: w,
            height: h,
        });
    }
    if f == 1 {
        return Ok(mask.clone());
    }
    let (sw, sh) = (w / f, h / f);
    let mut out = vec![false; sw * sh];
    for (y, row) in mask.bits().chunks_exact(w).enumerate() {
        let dst = &mut out[(y / f) * sw..(y / f + 1) * sw];
        for (block, cell) in row.chunks_exact(f).zip(dst.iter_mut()) {
            if !*cell && block.iter().any(|&b| b) {
                *cell = true;
            }
        }
    }
    BinaryMask::new(sw, sh, out)
}

/// Maps a box on the downscaled grid to the full-resolution rectangle
/// covering every source block it touches.
pub fn rescale_bbox(bbox: &BoundingBox, factor: NonZeroU32) -> BoundingBox {
    let f = factor.get();
    BoundingBox::new(
        bbox.x_min() * f,
        bbox.y_min() * f,
        (bbox.x_max() + 1) * f - 1,
        (bbox.y_max() + 1) * f - 1,
    )
    .expect("scaled box stays ordered")
}

/// Downscale, optionally keep the largest component, take its box and
/// scale it back to full resolution. `None` when nothing survives.
pub fn refine_box(
    mask: &BinaryMask,
    factor: NonZeroU32,
    connectivity: Connectivity,
    keep_largest: bool,
) -> Result<Option<BoundingBox>, MaskError> {
    let small = downscale_mask(mask, factor)?;
    let kept = if keep_largest {
        largest_component_filter(&small, connectivity)
    } else {
        small
    };
    Ok(bbox_from_mask(&kept).map(|b| rescale_bbox(&b, factor)))
}

/// Full-resolution result of the downscaled filter: the input pixels whose
/// block belongs to the largest component of the downscaled mask.
pub fn filter_via_downscale(
    mask: &BinaryMask,
    factor: NonZeroU32,
    connectivity: Connectivity,
) -> Result<BinaryMask, MaskError> {
    let small = downscale_mask(mask, factor)?;
    let labeling = label_components(&small, connectivity);
    let Some((label, _)) = largest_component(&labeling) else {
        return Ok(BinaryMask::empty(mask.width(), mask.height()));
    };
    let f = factor.get() as usize;
    let sw = small.width();
    Ok(BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        mask.get(x, y) && labeling.labels()[(y / f) * sw + x / f] == label
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nz(f: u32) -> NonZeroU32 {
        NonZeroU32::new(f).unwrap()
    }

    #[test]
    fn factor_one_is_identity() {
        let m = BinaryMask::from_fn(5, 3, |x, y| (x + y) % 3 == 0);
        assert_eq!(downscale_mask(&m, nz(1)).unwrap(), m);
        let b = BoundingBox::new(1, 2, 3, 4).unwrap();
        assert_eq!(rescale_bbox(&b, nz(1)), b);
    }

    #[test]
    fn single_pixel_lights_its_block() {
        let mut m = BinaryMask::empty(4, 4);
        m.set(3, 0, true);
        let s = downscale_mask(&m, nz(2)).unwrap();
        assert_eq!(s.dims(), (2, 2));
        assert_eq!(s.bits(), &[false, true, false, false]);
    }

    #[test]
    fn paper_sized_downscale() {
        let m = BinaryMask::empty(512, 512);
        assert_eq!(downscale_mask(&m, nz(4)).unwrap().dims(), (128, 128));
    }

    #[test]
    fn non_divisible_factor_errors() {
        let m = BinaryMask::empty(10, 8);
        assert!(matches!(
            downscale_mask(&m, nz(4)),
            Err(MaskError::NonDivisibleFactor { factor: 4, .. })
        ));
    }

    #[test]
    fn rescale_covers_blocks() {
        let b = BoundingBox::new(1, 1, 2, 2).unwrap();
        assert_eq!(
            rescale_bbox(&b, nz(4)),
            BoundingBox::new(4, 4, 11, 11).unwrap()
        );
        let full = BoundingBox::new(0, 0, 127, 127).unwrap();
        assert_eq!(
            rescale_bbox(&full, nz(4)),
            BoundingBox::new(0, 0, 511, 511).unwrap()
        );
    }

    #[test]
    fn refine_drops_speckle() {
        let mut m =
            BinaryMask::from_fn(32, 32, |x, y| (8..24).contains(&x) && (8..24).contains(&y));
        m.set(30, 1, true);
        m.set(31, 1, true);
        let filtered = refine_box(&m, nz(4), Connectivity::Four, true).unwrap();
        assert_eq!(filtered, Some(BoundingBox::new(8, 8, 23, 23).unwrap()));
        let raw = refine_box(&m, nz(4), Connectivity::Four, false).unwrap();
        assert_eq!(raw, Some(BoundingBox::new(8, 0, 31, 23).unwrap()));
    }

    #[test]
    fn filter_via_downscale_keeps_only_target_pixels() {
        let mut m = BinaryMask::from_fn(16, 16, |x, y| (1..7).contains(&x) && (1..7).contains(&y));
        m.set(14, 14, true);
        let out = filter_via_downscale(&m, nz(2), Connectivity::Four).unwrap();
        assert!(out.is_subset_of(&m));
        assert!(!out.get(14, 14));
        assert_eq!(out.count(), 36);
    }
}
