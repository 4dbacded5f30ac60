//! Single-channel 8-bit PNG masks and grayscale images.

use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageFormat, ImageReader};

use crate::mask::{BinaryMask, ProbabilityMap};

use super::{io_err, StorageError};

pub fn read_gray(path: &Path) -> Result<GrayImage, StorageError> {
    let reader = ImageReader::open(path).map_err(io_err(path))?;
    let img = reader
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(|e| StorageError::PngDecode {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
    match img {
        DynamicImage::ImageLuma8(g) => Ok(g),
        other => Err(StorageError::UnsupportedPng {
            path: path.to_owned(),
            color: color_name(other.color()),
        }),
    }
}

pub fn write_gray(path: &Path, img: &GrayImage) -> Result<(), StorageError> {
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => StorageError::Io {
                path: path.to_owned(),
                source: io,
            },
            other => StorageError::PngDecode {
                path: path.to_owned(),
                reason: other.to_string(),
            },
        })
}

/// Any nonzero pixel reads as foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask, StorageError> {
    let g = read_gray(path)?;
    let (w, h) = (g.width() as usize, g.height() as usize);
    Ok(
        BinaryMask::new(w, h, g.into_raw().into_iter().map(|p| p != 0).collect())
            .expect("image buffer matches its dims"),
    )
}

/// Writes foreground as 255 and background as 0.
pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<(), StorageError> {
    write_gray(path, &mask_to_gray(mask))
}

pub fn mask_to_gray(mask: &BinaryMask) -> GrayImage {
    GrayImage::from_raw(
        mask.width() as u32,
        mask.height() as u32,
        mask.bits()
            .iter()
            .map(|&b| if b { 255 } else { 0 })
            .collect(),
    )
    .expect("mask buffer matches its dims")
}

/// Grayscale PNG read as a probability map, `value / 255`.
pub fn read_gray_probmap(path: &Path) -> Result<ProbabilityMap<f32>, StorageError> {
    let g = read_gray(path)?;
    let (w, h) = (g.width() as usize, g.height() as usize);
    Ok(ProbabilityMap::new(
        w,
        h,
        g.into_raw()
            .into_iter()
            .map(|p| f32::from(p) / 255.0)
            .collect(),
    )
    .expect("scaled bytes lie in [0, 1]"))
}

fn color_name(c: ColorType) -> String {
    format!("{c:?}")
}
