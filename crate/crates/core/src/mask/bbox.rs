use serde::{Deserialize, Serialize};

use super::{BinaryMask, MaskError};

/// Inclusive pixel rectangle. `x` indexes columns, `y` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoundingBox {
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
}

#[derive(Deserialize)]
struct RawBox {
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
}

impl TryFrom<RawBox> for BoundingBox {
    type Error = MaskError;

    fn try_from(r: RawBox) -> Result<Self, Self::Error> {
        BoundingBox::new(r.x_min, r.y_min, r.x_max, r.y_max)
    }
}

impl BoundingBox {
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self, MaskError> {
        if x_min > x_max || y_min > y_max {
            return Err(MaskError::InvalidBox {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// The whole `width`x`height` image.
    pub fn full(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "empty image has no box");
        Self {
            x_min: 0,
            y_min: 0,
            x_max: width as u32 - 1,
            y_max: height as u32 - 1,
        }
    }

    pub fn x_min(&self) -> u32 {
        self.x_min
    }

    pub fn y_min(&self) -> u32 {
        self.y_min
    }

    pub fn x_max(&self) -> u32 {
        self.x_max
    }

    pub fn y_max(&self) -> u32 {
        self.y_max
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        (self.x_max as usize) < width && (self.y_max as usize) < height
    }

    pub fn translate(&self, dx: u32, dy: u32) -> Self {
        Self {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    /// Inverse of [`translate`](Self::translate); `None` if the result would go negative.
    pub fn translate_back(&self, dx: u32, dy: u32) -> Option<Self> {
        Some(Self {
            x_min: self.x_min.checked_sub(dx)?,
            y_min: self.y_min.checked_sub(dy)?,
            x_max: self.x_max.checked_sub(dx)?,
            y_max: self.y_max.checked_sub(dy)?,
        })
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

impl std::fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// Parses `x_min,y_min,x_max,y_max`.
impl std::str::FromStr for BoundingBox {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MaskError::BoxSyntax(format!("expected x_min,y_min,x_max,y_max, got {s:?}"));
        let v: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [x0, y0, x1, y1] => BoundingBox::new(x0, y0, x1, y1),
            _ => Err(bad()),
        }
    }
}

/// Tightest inclusive rectangle around the foreground, `None` for an empty mask.
pub fn bbox_from_mask(mask: &BinaryMask) -> Option<BoundingBox> {
    let (w, _) = mask.dims();
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
        let (x, y) = (i % w, i / w);
        bounds = Some(match bounds {
            None => (x, y, x, y),
            Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
        });
    }
    bounds.map(|(x0, y0, x1, y1)| BoundingBox {
        x_min: x0 as u32,
        y_min: y0 as u32,
        x_max: x1 as u32,
        y_max: y1 as u32,
    })
}
