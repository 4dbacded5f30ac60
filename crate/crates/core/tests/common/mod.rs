//! Test-only oracles, independent of the library's labeling and scoring code.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use maskprompt::{BinaryMask, ComponentLabeling, Connectivity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain disjoint-set forest with path halving.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Oracle components: for every foreground pixel, the root of its set, plus
/// set sizes keyed by root.
pub struct OracleComponents {
    pub root: Vec<Option<usize>>,
    pub sizes: HashMap<usize, usize>,
}

impl OracleComponents {
    pub fn max_size(&self) -> usize {
        self.sizes.values().copied().max().unwrap_or(0)
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn oracle_components(mask: &BinaryMask, conn: Connectivity) -> OracleComponents {
    let (w, h) = mask.dims();
    let mut uf = UnionFind::new(w * h);
    let neighbors: &[(isize, isize)] = match conn {
        Connectivity::Four => &[(1, 0), (0, 1)],
        Connectivity::Eight => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    };
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for &(dx, dy) in neighbors {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    let (nx, ny) = (nx as usize, ny as usize);
                    if mask.get(nx, ny) {
                        uf.union(y * w + x, ny * w + nx);
                    }
                }
            }
        }
    }
    let mut root = vec![None; w * h];
    let mut sizes = HashMap::new();
    for (i, slot) in root.iter_mut().enumerate() {
        if mask.bits()[i] {
            let r = uf.find(i);
            *slot = Some(r);
            *sizes.entry(r).or_insert(0) += 1;
        }
    }
    OracleComponents { root, sizes }
}

/// Checks a labeling against the oracle: same partition, same sizes,
/// labels numbered by first appearance in row-major order.
pub fn labeling_matches_oracle(
    labeling: &ComponentLabeling,
    oracle: &OracleComponents,
) -> Result<(), String> {
    let labels = labeling.labels();
    let mut to_root: HashMap<u32, usize> = HashMap::new();
    let mut to_label: HashMap<usize, u32> = HashMap::new();
    let mut next_expected = 1u32;
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for (i, (&l, r)) in labels.iter().zip(&oracle.root).enumerate() {
        match (l, r) {
            (0, None) => {}
            (0, Some(_)) => return Err(format!("foreground pixel {i} unlabeled")),
            (_, None) => return Err(format!("background pixel {i} labeled {l}")),
            (l, Some(r)) => {
                if !to_root.contains_key(&l) {
                    if l != next_expected {
                        return Err(format!(
                            "label {l} first seen where {next_expected} expected"
                        ));
                    }
                    next_expected += 1;
                }
                if *to_root.entry(l).or_insert(*r) != *r || *to_label.entry(*r).or_insert(l) != l {
                    return Err(format!("partition differs at pixel {i}"));
                }
                *counts.entry(l).or_insert(0) += 1;
            }
        }
    }
    if labeling.component_count() != oracle.count() {
        return Err(format!(
            "{} components vs oracle {}",
            labeling.component_count(),
            oracle.count()
        ));
    }
    for (l, n) in counts {
        if labeling.sizes()[l as usize] != n || oracle.sizes[&to_root[&l]] != n {
            return Err(format!("size mismatch for label {l}"));
        }
    }
    let background = oracle.root.iter().filter(|r| r.is_none()).count();
    if labeling.sizes()[0] != background {
        return Err("background size mismatch".into());
    }
    Ok(())
}

/// Bernoulli mask with a per-mask random density.
pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let p: f64 = rng.gen_range(0.05..0.7);
    BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(p))
}

/// A few filled ellipses plus scattered single-pixel noise.
pub fn blob_mask(rng: &mut ChaCha8Rng, size: usize) -> BinaryMask {
    let s = size as f64;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..5))
        .map(|_| {
            (
                rng.gen_range(0.0..s),
                rng.gen_range(0.0..s),
                rng.gen_range(s * 0.02..s * 0.15),
                rng.gen_range(s * 0.02..s * 0.15),
            )
        })
        .collect();
    let noise = rng.gen_range(0.0..0.002);
    BinaryMask::from_fn(size, size, |x, y| {
        blobs.iter().any(|&(cx, cy, rx, ry)| {
            let dx = (x as f64 - cx) / rx;
            let dy = (y as f64 - cy) / ry;
            dx * dx + dy * dy <= 1.0
        }) || rng.gen_bool(noise)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dice from coordinate sets.
pub fn oracle_dice(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let set = |m: &BinaryMask| -> HashSet<(usize, usize)> {
        (0..m.height())
            .flat_map(|y| (0..m.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| m.get(x, y))
            .collect()
    };
    let (sa, sb) = (set(a), set(b));
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    2.0 * sa.intersection(&sb).count() as f64 / (sa.len() + sb.len()) as f64
}

/// Tight box `(x_min, y_min, x_max, y_max)` by scanning coordinates.
pub fn oracle_bbox(m: &BinaryMask) -> Option<(u32, u32, u32, u32)> {
    let pts: Vec<(usize, usize)> = (0..m.height())
        .flat_map(|y| (0..m.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| m.get(x, y))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let xs = pts.iter().map(|p| p.0 as u32);
    let ys = pts.iter().map(|p| p.1 as u32);
    Some((
        xs.clone().min().unwrap(),
        ys.clone().min().unwrap(),
        xs.max().unwrap(),
        ys.max().unwrap(),
    ))
}

/// Largest component; among equals, the one whose first pixel comes first in
/// row-major order. Roots are minimal indices, so that is the smallest root.
pub fn oracle_largest(mask: &BinaryMask, conn: Connectivity) -> BinaryMask {
    let oracle = oracle_components(mask, conn);
    let max = oracle.max_size();
    let keep = oracle
        .sizes
        .iter()
        .filter(|(_, &n)| n == max)
        .map(|(&r, _)| r)
        .min();
    let (w, h) = mask.dims();
    let bits = oracle
        .root
        .iter()
        .map(|r| r.is_some() && *r == keep)
        .collect();
    BinaryMask::new(w, h, bits).unwrap()
}
