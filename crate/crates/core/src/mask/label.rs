use std::collections::VecDeque;

use super::{BinaryMask, Connectivity};

/// Component ids per pixel (0 = background) and the pixel count of every id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    /// `sizes[0]` counts background pixels.
    sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Mask of the pixels carrying `label`.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.labels
                .iter()
                .map(|&l| l == label && label != 0)
                .collect(),
        )
        .expect("labeling dims are consistent")
    }
}

/// Breadth-first labeling. Components are numbered in row-major discovery
/// order, so the component containing the first foreground pixel is 1.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabeling {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut sizes = vec![0usize];
    let mut queue = VecDeque::new();
    let offsets = connectivity.offsets();

    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32;
        let mut size = 0usize;
        labels[start] = label;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if bits[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    sizes[0] = bits.len() - sizes[1..].iter().sum::<usize>();

    ComponentLabeling {
        width: w,
        height: h,
        labels,
        sizes,
    }
}

/// Label and size of the biggest component; ties go to the smallest label.
pub fn largest_component(labeling: &ComponentLabeling) -> Option<(u32, usize)> {
    labeling
        .sizes
        .iter()
        .enumerate()
        .skip(1)
        .fold(None, |best, (label, &size)| match best {
            Some((_, s)) if s >= size => best,
            _ => Some((label as u32, size)),
        })
}

/// Keeps only the largest connected component.
pub fn largest_component_filter(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let labeling = label_components(mask, connectivity);
    match largest_component(&labeling) {
        Some((label, _)) => labeling.component_mask(label),
        None => BinaryMask::empty(mask.width(), mask.height()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn center_pixel() {
        let l = label_components(&mask(&["...", ".#.", "..."]), Connectivity::Four);
        assert_eq!(l.component_count(), 1);
        assert_eq!(l.sizes()[1], 1);
        assert_eq!(l.sizes()[0], 8);
    }

    #[test]
    fn strip_two_components_in_scan_order() {
        let l = label_components(&mask(&["##.##"]), Connectivity::Four);
        assert_eq!(l.labels(), &[1, 1, 0, 2, 2]);
        assert_eq!(&l.sizes()[1..], &[2, 2]);
    }

    #[test]
    fn corners_stay_separate_under_both_connectivities() {
        let m = mask(&["#.#", "...", "#.#"]);
        for c in [Connectivity::Four, Connectivity::Eight] {
            let l = label_components(&m, c);
            assert_eq!(l.component_count(), 4);
            assert!(l.sizes()[1..].iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn diagonal_joins_only_under_eight() {
        let m = mask(&["#.", ".#"]);
        assert_eq!(
            label_components(&m, Connectivity::Four).component_count(),
            2
        );
        assert_eq!(
            label_components(&m, Connectivity::Eight).component_count(),
            1
        );
    }

    #[test]
    fn empty_mask_has_no_components() {
        let l = label_components(&BinaryMask::empty(4, 3), Connectivity::Eight);
        assert_eq!(l.component_count(), 0);
        assert_eq!(largest_component(&l), None);
    }

    #[test]
    fn filter_keeps_larger() {
        let m = mask(&[
            "##...", //
            "#....", ".....", ".....", "....#",
        ]);
        let out = largest_component_filter(&m, Connectivity::Four);
        assert_eq!(out, mask(&["##...", "#....", ".....", ".....", "....."]));
    }

    #[test]
    fn filter_tie_prefers_earliest() {
        let m = mask(&["##.##"]);
        let out = largest_component_filter(&m, Connectivity::Four);
        assert_eq!(out, mask(&["##..."]));
    }

    #[test]
    fn filter_identity_and_empty() {
        let single = mask(&[".##.", ".#..", ".##."]);
        assert_eq!(
            largest_component_filter(&single, Connectivity::Four),
            single
        );
        let empty = BinaryMask::empty(3, 3);
        assert_eq!(largest_component_filter(&empty, Connectivity::Four), empty);
    }
}
