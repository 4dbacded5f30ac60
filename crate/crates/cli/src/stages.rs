//! Single-file stages.

use std::path::{Path, PathBuf};

use clap::Args;
use maskprompt::compose::{merge_tiles, CompositeBatch, Tile, TileSlot, SLOTS};
use maskprompt::eval::dice;
use maskprompt::mask::{bbox_from_mask, filter_via_downscale, refine_box, threshold};
use maskprompt::storage::{self, read_manifest, ManifestComposite, PromptManifest};
use maskprompt::{BoundingBox, Connectivity, PipelineConfig, ProbabilityMap};

use crate::error::{io, Failure};

fn read_map(path: &Path) -> Result<ProbabilityMap<f32>, Failure> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("npy") => Ok(storage::read_probmap(path)?),
        Some("png") => Ok(storage::read_gray_probmap(path)?),
        _ => Err(Failure::Validation(format!(
            "{}: expected a .npy or .png file",
            path.display()
        ))),
    }
}

fn create_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| io(p, e)),
        _ => Ok(()),
    }
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Probability map (.npy, or .png scaled to [0, 1]).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Cutoff; defaults to the configured theta1.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn threshold_cmd(mut cfg: PipelineConfig, a: &ThresholdArgs) -> Result<(), Failure> {
    cfg.theta1 = a.theta.unwrap_or(cfg.theta1);
    cfg.validate_thresholds()?;
    let mask = threshold(&read_map(&a.input)?, cfg.theta1 as f32)?;
    create_parent(&a.out)?;
    storage::write_mask(&a.out, &mask)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub factor: Option<u32>,
    #[arg(long)]
    pub connectivity: Option<Connectivity>,
    /// Filtered full-resolution mask.
    #[arg(long)]
    pub out: PathBuf,
}

/// Threshold, keep the largest component at reduced resolution, write the
/// surviving pixels and print the refined box.
pub fn filter_cmd(mut cfg: PipelineConfig, a: &FilterArgs) -> Result<(), Failure> {
    cfg.theta1 = a.theta.unwrap_or(cfg.theta1);
    cfg.downscale_factor = a.factor.unwrap_or(cfg.downscale_factor);
    cfg.connectivity = a.connectivity.unwrap_or(cfg.connectivity);
    cfg.validate_thresholds()?;
    let mask = threshold(&read_map(&a.input)?, cfg.theta1 as f32)?;
    let kept = filter_via_downscale(&mask, cfg.factor(), cfg.connectivity)?;
    create_parent(&a.out)?;
    storage::write_mask(&a.out, &kept)?;
    match refine_box(&mask, cfg.factor(), cfg.connectivity, true)? {
        Some(b) => println!("{b}"),
        None => eprintln!("note: no foreground at theta {}", cfg.theta1),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BboxArgs {
    /// Mask PNG.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Box the largest component only.
    #[arg(long)]
    pub largest: bool,
    /// Compute at reduced resolution and rescale; 1 gives the tight box.
    #[arg(long, default_value_t = 1)]
    pub factor: u32,
    #[arg(long)]
    pub connectivity: Option<Connectivity>,
}

pub fn bbox_cmd(mut cfg: PipelineConfig, a: &BboxArgs) -> Result<(), Failure> {
    cfg.downscale_factor = a.factor;
    cfg.connectivity = a.connectivity.unwrap_or(cfg.connectivity);
    cfg.validate_thresholds()?;
    let mask = storage::read_mask(&a.input)?;
    let b = if a.largest || a.factor > 1 {
        refine_box(&mask, cfg.factor(), cfg.connectivity, a.largest)?
    } else {
        bbox_from_mask(&mask)
    };
    let b =
        b.ok_or_else(|| Failure::Validation(format!("{}: mask is empty", a.input.display())))?;
    println!("{b}");
    Ok(())
}

/// `tile:x_min,y_min,x_max,y_max`, tile counted from 0 in `--tile` order.
#[derive(Debug, Clone)]
pub struct TileBox {
    pub tile: usize,
    pub bbox: BoundingBox,
}

impl std::str::FromStr for TileBox {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tile, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected TILE:x_min,y_min,x_max,y_max, got {s:?}"))?;
        Ok(TileBox {
            tile: tile
                .parse()
                .map_err(|_| format!("bad tile index {tile:?}"))?,
            bbox: rest.parse().map_err(|e| format!("{e}"))?,
        })
    }
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// One to four square grayscale tiles, placed in slot order.
    #[arg(long = "tile", required = true, num_args = 1..=4)]
    pub tiles: Vec<PathBuf>,
    /// Tile-local box, repeatable.
    #[arg(long = "box")]
    pub boxes: Vec<TileBox>,
    #[arg(long, default_value = "composite")]
    pub id: String,
    /// Composite PNG.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a one-composite prompt manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn case_id_of(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = name.strip_suffix(".png").unwrap_or(&name);
    name.strip_suffix(".image").unwrap_or(name).to_owned()
}

pub fn merge_cmd(a: &MergeArgs) -> Result<(), Failure> {
    if let Some(b) = a.boxes.iter().find(|b| b.tile >= a.tiles.len()) {
        return Err(Failure::Validation(format!(
            "box for tile {} but only {} tiles given",
            b.tile,
            a.tiles.len()
        )));
    }
    let tiles = a
        .tiles
        .iter()
        .enumerate()
        .map(|(k, p)| {
            Ok(Tile {
                case_id: case_id_of(p),
                image: storage::read_gray(p)?,
                boxes: a
                    .boxes
                    .iter()
                    .filter(|b| b.tile == k)
                    .map(|b| b.bbox)
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let c = merge_tiles(a.id.clone(), tiles)?;
    create_parent(&a.out)?;
    storage::write_gray(&a.out, c.image())?;
    if let Some(m) = &a.manifest {
        let base = m.parent().unwrap_or(Path::new(""));
        let image = a.out.strip_prefix(base).unwrap_or(&a.out);
        let mut manifest = PromptManifest::new(c.tile_size());
        manifest
            .composites
            .push(ManifestComposite::from_batch(&c, image.to_string_lossy()));
        create_parent(m)?;
        storage::write_manifest(m, &manifest)?;
    }
    for (slot, b, bbox) in c.prompts() {
        println!("{slot} {b} {bbox}");
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Composite image (.png) or composite-sized map (.npy).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Names tiles after the cases in this manifest.
    #[arg(long, requires = "composite")]
    pub manifest: Option<PathBuf>,
    /// Composite id within the manifest.
    #[arg(long)]
    pub composite: Option<String>,
    /// Number of filled slots when no manifest is given.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub tiles: u8,
}

pub fn split_cmd(a: &SplitArgs) -> Result<(), Failure> {
    let slots: [Option<String>; SLOTS] = match (&a.manifest, &a.composite) {
        (Some(m), Some(id)) => {
            let manifest = read_manifest(m)?;
            let entry = manifest
                .composites
                .iter()
                .find(|c| &c.composite_id == id)
                .ok_or_else(|| {
                    Failure::Validation(format!("{}: no composite {id:?}", m.display()))
                })?;
            entry.slots.clone()
        }
        _ => std::array::from_fn(|k| (k < usize::from(a.tiles)).then(|| format!("slot{k}"))),
    };
    let names = |case: &str| a.out_dir.join(case);
    let is_npy = a.input.extension().is_some_and(|e| e == "npy");
    if is_npy {
        let map = storage::read_probmap(&a.input)?;
        let (w, h) = map.dims();
        if w != h || w % 2 != 0 {
            return Err(Failure::Validation(format!(
                "map is {w}x{h}, not an even square"
            )));
        }
        let slots: [TileSlot; SLOTS] =
            std::array::from_fn(|k| TileSlot::new(k, slots[k].clone()).expect("k < SLOTS"));
        for (case, tile) in maskprompt::compose::split_composite(&map, &slots, (w / 2) as u32)? {
            let path = names(&format!("{case}.npy"));
            create_parent(&path)?;
            storage::write_probmap(&path, &tile)?;
        }
    } else {
        let image = storage::read_gray(&a.input)?;
        let (w, h) = image.dimensions();
        if w != h || w % 2 != 0 {
            return Err(Failure::Validation(format!(
                "image is {w}x{h}, not an even square"
            )));
        }
        let slots: [TileSlot; SLOTS] =
            std::array::from_fn(|k| TileSlot::new(k, slots[k].clone()).expect("k < SLOTS"));
        let c = CompositeBatch::from_parts("split", w / 2, slots, image, Default::default())?;
        for (k, slot) in c.slots().iter().enumerate() {
            if let Some(case) = slot.case_id() {
                let path = names(&format!("{case}.png"));
                create_parent(&path)?;
                storage::write_gray(&path, &c.tile_image(k))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct DiceArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
}

pub fn dice_cmd(a: &DiceArgs) -> Result<(), Failure> {
    let d: f64 = dice(&storage::read_mask(&a.pred)?, &storage::read_mask(&a.gt)?)?;
    println!("{d:?}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tile_box_syntax() {
        let b: TileBox = "2:1,2,3,4".parse().unwrap();
        assert_eq!((b.tile, b.bbox.as_array()), (2, [1, 2, 3, 4]));
        assert!("1,2,3,4".parse::<TileBox>().is_err());
        assert!("x:1,2,3,4".parse::<TileBox>().is_err());
        assert!("0:3,2,1,4".parse::<TileBox>().is_err());
    }

    #[test]
    fn case_ids_drop_image_suffix() {
        assert_eq!(case_id_of(Path::new("d/B/case001.image.png")), "case001");
        assert_eq!(case_id_of(Path::new("t.png")), "t");
    }
}
