//! Prompt manifest: the JSON hand-off between box refinement and an
//! external promptable segmenter.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "tile_size": 512,
//!   "composites": [
//!     {
//!       "composite_id": "B-0000",
//!       "image": "composites/B-0000.png",
//!       "slots": ["B/case000", "B/case001", null, null],
//!       "boxes": [[{"x_min": 10, "y_min": 12, "x_max": 90, "y_max": 99}], [...], [], []]
//!     }
//!   ]
//! }
//! ```
//!
//! Boxes are in composite coordinates and must lie inside their slot's
//! quadrant; `null` slots are blank and carry no boxes. For every
//! `(composite, slot, box)` the segmenter writes one composite-sized NPY map
//! at `<composite_id>/<slot>/<box>.npy` under the prediction directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::compose::{CompositeBatch, TileSlot, SLOTS};
use crate::mask::BoundingBox;

use super::{io_err, StorageError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptManifest {
    pub schema_version: u32,
    pub tile_size: u32,
    pub composites: Vec<ManifestComposite>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestComposite {
    pub composite_id: String,
    /// Composite PNG, relative to the manifest's directory.
    pub image: String,
    pub slots: [Option<String>; SLOTS],
    pub boxes: [Vec<BoundingBox>; SLOTS],
}

impl ManifestComposite {
    pub fn from_batch(batch: &CompositeBatch, image: impl Into<String>) -> Self {
        Self {
            composite_id: batch.id().to_owned(),
            image: image.into(),
            slots: std::array::from_fn(|k| batch.slots()[k].case_id().map(str::to_owned)),
            boxes: batch.boxes().clone(),
        }
    }

    /// Rebuilds the composite around its pixels, re-checking containment.
    pub fn to_batch(
        &self,
        tile_size: u32,
        image: GrayImage,
    ) -> Result<CompositeBatch, StorageError> {
        let slots: [TileSlot; SLOTS] = std::array::from_fn(|k| {
            TileSlot::new(k, self.slots[k].clone()).expect("index below SLOTS")
        });
        CompositeBatch::from_parts(
            self.composite_id.clone(),
            tile_size,
            slots,
            image,
            self.boxes.clone(),
        )
        .map_err(StorageError::Containment)
    }

    /// Relative path of the prediction map for one prompt.
    pub fn prediction_path(&self, slot: usize, box_index: usize) -> PathBuf {
        prediction_path(&self.composite_id, slot, box_index)
    }
}

pub fn prediction_path(composite_id: &str, slot: usize, box_index: usize) -> PathBuf {
    Path::new(composite_id)
        .join(slot.to_string())
        .join(format!("{box_index}.npy"))
}

impl PromptManifest {
    pub fn new(tile_size: u32) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tile_size,
            composites: Vec::new(),
        }
    }

    /// Schema version, id uniqueness and box containment.
    pub fn validate(&self) -> Result<(), StorageError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(StorageError::SchemaVersionMismatch {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        if self.tile_size == 0 {
            return Err(StorageError::MalformedJson(
                "tile_size must be positive".into(),
            ));
        }
        let mut seen = HashSet::new();
        for c in &self.composites {
            if !seen.insert(c.composite_id.as_str()) {
                return Err(StorageError::DuplicateCompositeId(c.composite_id.clone()));
            }
            let side = 2 * self.tile_size;
            c.to_batch(self.tile_size, GrayImage::new(side, side))?;
        }
        Ok(())
    }
}

pub fn write_manifest(path: &Path, manifest: &PromptManifest) -> Result<(), StorageError> {
    manifest.validate()?;
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| StorageError::MalformedJson(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_manifest(path: &Path) -> Result<PromptManifest, StorageError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_manifest(&text)
}

pub fn parse_manifest(text: &str) -> Result<PromptManifest, StorageError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| StorageError::MalformedJson(e.to_string()))?;
    // Version first, so a future schema is reported as such rather than as bad JSON.
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(StorageError::SchemaVersionMismatch {
                found: v as u32,
                supported: SCHEMA_VERSION,
            })
        }
        None => return Err(StorageError::MalformedJson("missing schema_version".into())),
    }
    let manifest: PromptManifest =
        serde_json::from_value(value).map_err(|e| StorageError::MalformedJson(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}
