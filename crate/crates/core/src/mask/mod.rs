//! Pixel-grid primitives: probability maps, binary masks, bounding boxes,
//! connected components and the downscaled largest-component filter.

mod bbox;
mod label;
mod resample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Confidence;

pub use bbox::{bbox_from_mask, BoundingBox};
pub use label::{label_components, largest_component, largest_component_filter, ComponentLabeling};
pub use resample::{downscale_mask, filter_via_downscale, refine_box, rescale_bbox};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    #[error("buffer holds {actual} values but {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("factor {factor} does not divide {width}x{height}")]
    NonDivisibleFactor {
        factor: u32,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid box ({x_min},{y_min})-({x_max},{y_max})")]
    InvalidBox {
        x_min: u32,
        y_min: u32,
        x_max: u32,
        y_max: u32,
    },
    #[error("cannot parse box: {0}")]
    BoxSyntax(String),
}

/// Pixel adjacency used for component labeling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    /// N, S, E and W neighbors.
    #[default]
    Four,
    /// All eight surrounding pixels.
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| format!("connectivity must be 4 or 8, got {s:?}"))
            .and_then(Connectivity::try_from)
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

/// Row-major grid of confidences, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Confidence> ProbabilityMap<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self, MaskError> {
        check_len(width, height, values.len())?;
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_unit()) {
            return Err(MaskError::OutOfRange {
                index,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Map filled with zeros.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![T::zero(); width * height],
        }
    }

    /// Builds a map from `f(x, y)`; values outside `[0, 1]` are rejected.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, MaskError> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    /// Sets one pixel. Panics when `v` is outside `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        assert!(v.is_unit(), "confidence {v} outside [0, 1]");
        self.values[y * self.width + x] = v;
    }

    pub fn threshold(&self, theta: T) -> Result<BinaryMask, MaskError> {
        threshold(self, theta)
    }

    /// Copies the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop out of bounds"
        );
        let mut values = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            values.extend_from_slice(&self.values[row + x0..row + x0 + w]);
        }
        Self {
            width: w,
            height: h,
            values,
        }
    }

    /// Converts every value to another float type.
    pub fn cast<U: Confidence>(&self) -> ProbabilityMap<U> {
        ProbabilityMap {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|&v| U::from(v).expect("float conversion").min(U::one()))
                .collect(),
        }
    }
}

/// Foreground iff `value >= theta`.
pub fn threshold<T: Confidence>(
    map: &ProbabilityMap<T>,
    theta: T,
) -> Result<BinaryMask, MaskError> {
    if !theta.is_unit() {
        return Err(MaskError::InvalidThreshold(
            theta.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(BinaryMask {
        width: map.width,
        height: map.height,
        bits: map.values.iter().map(|&v| v >= theta).collect(),
    })
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MaskError> {
        check_len(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// All-background mask.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn has_foreground(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// `true` when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize, MaskError> {
        self.same_dims(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count())
    }

    /// Pixelwise OR, in place.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<(), MaskError> {
        self.same_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// Clears every pixel outside `bbox`.
    pub fn retain_inside(&mut self, bbox: &BoundingBox) {
        let width = self.width;
        for (i, b) in self.bits.iter_mut().enumerate() {
            if *b && !bbox.contains_pixel((i % width) as u32, (i / width) as u32) {
                *b = false;
            }
        }
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop out of bounds"
        );
        let mut bits = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            bits.extend_from_slice(&self.bits[row + x0..row + x0 + w]);
        }
        Self {
            width: w,
            height: h,
            bits,
        }
    }

    /// Copies `src` into `self` with its top-left corner at `(x0, y0)`.
    pub fn paste(&mut self, src: &BinaryMask, x0: usize, y0: usize) {
        assert!(
            x0 + src.width <= self.width && y0 + src.height <= self.height,
            "paste out of bounds"
        );
        for y in 0..src.height {
            let dst = (y0 + y) * self.width + x0;
            self.bits[dst..dst + src.width]
                .copy_from_slice(&src.bits[y * src.width..(y + 1) * src.width]);
        }
    }

    /// Map with 1.0 on foreground and 0.0 elsewhere.
    pub fn to_probability<T: Confidence>(&self) -> ProbabilityMap<T> {
        ProbabilityMap {
            width: self.width,
            height: self.height,
            values: self
                .bits
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }

    fn same_dims(&self, other: &BinaryMask) -> Result<(), MaskError> {
        if self.dims() != other.dims() {
            return Err(MaskError::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

fn check_len(width: usize, height: usize, actual: usize) -> Result<(), MaskError> {
    let expected = width * height;
    if expected != actual {
        return Err(MaskError::BufferSize {
            width,
            height,
            expected,
            actual,
        });
    }
    Ok(())
}
