//! Dataset directory layout:
//!
//! ```text
//! <root>/<domain>/<stem>.image.png   8-bit grayscale image
//! <root>/<domain>/<stem>.gt.png      ground-truth mask
//! <root>/<domain>/<stem>.coarse.npy  coarse probability map
//! ```
//!
//! Domains and stems are processed in lexicographic order. A case id is
//! `<domain>/<stem>`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use image::GrayImage;

use crate::mask::{BinaryMask, ProbabilityMap};

use super::{io_err, npy, png, StorageError};

pub const IMAGE_SUFFIX: &str = ".image.png";
pub const GT_SUFFIX: &str = ".gt.png";
pub const COARSE_SUFFIX: &str = ".coarse.npy";

/// One case: image, coarse map and ground truth of equal dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub case_id: String,
    pub domain: String,
    pub image: GrayImage,
    pub coarse_map: ProbabilityMap<f32>,
    pub gt_mask: BinaryMask,
}

impl CaseRecord {
    pub fn new(
        domain: &str,
        stem: &str,
        image: GrayImage,
        coarse_map: ProbabilityMap<f32>,
        gt_mask: BinaryMask,
    ) -> Result<Self, StorageError> {
        let case_id = format!("{domain}/{stem}");
        let dims = (image.width() as usize, image.height() as usize);
        for (what, d) in [
            ("coarse map", coarse_map.dims()),
            ("gt mask", gt_mask.dims()),
        ] {
            if d != dims {
                return Err(StorageError::CaseDimensions {
                    case_id,
                    detail: format!("{what} is {d:?}, image is {dims:?}"),
                });
            }
        }
        Ok(Self {
            case_id,
            domain: domain.to_owned(),
            image,
            coarse_map,
            gt_mask,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.gt_mask.dims()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSplit {
    pub label: String,
    pub cases: Vec<CaseRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    domains: Vec<DomainSplit>,
    index: HashMap<String, (usize, usize)>,
}

impl Dataset {
    pub fn from_domains(domains: Vec<DomainSplit>) -> Self {
        let mut index = HashMap::new();
        for (d, split) in domains.iter().enumerate() {
            for (c, case) in split.cases.iter().enumerate() {
                index.insert(case.case_id.clone(), (d, c));
            }
        }
        Self { domains, index }
    }

    pub fn domains(&self) -> &[DomainSplit] {
        &self.domains
    }

    pub fn domain(&self, label: &str) -> Option<&DomainSplit> {
        self.domains.iter().find(|d| d.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(|d| d.label.as_str())
    }

    pub fn case(&self, case_id: &str) -> Option<&CaseRecord> {
        self.index
            .get(case_id)
            .map(|&(d, c)| &self.domains[d].cases[c])
    }

    pub fn case_count(&self) -> usize {
        self.index.len()
    }
}

#[derive(Default)]
struct CaseFiles {
    image: bool,
    gt: bool,
    coarse: bool,
}

/// Loads every domain under `root`; incomplete cases and dimension
/// mismatches fail the whole load.
pub fn ingest(root: &Path) -> Result<Dataset, StorageError> {
    ingest_domains(root, None)
}

/// Like [`ingest`] but limited to `only` when given.
pub fn ingest_domains(root: &Path, only: Option<&[String]>) -> Result<Dataset, StorageError> {
    if !root.is_dir() {
        return Err(StorageError::DatasetMissing(root.to_owned()));
    }
    let mut labels = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_dir() && !name.starts_with('.') {
            labels.push(name);
        }
    }
    labels.sort();
    if let Some(wanted) = only {
        if let Some(missing) = wanted.iter().find(|w| !labels.contains(w)) {
            return Err(StorageError::DatasetMissing(root.join(missing)));
        }
        labels.retain(|l| wanted.contains(l));
    }

    let mut domains = Vec::with_capacity(labels.len());
    for label in labels {
        domains.push(DomainSplit {
            cases: ingest_domain(&root.join(&label), &label)?,
            label,
        });
    }
    Ok(Dataset::from_domains(domains))
}

fn ingest_domain(dir: &Path, label: &str) -> Result<Vec<CaseRecord>, StorageError> {
    let mut stems: BTreeMap<String, CaseFiles> = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let name = entry
            .map_err(io_err(dir))?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if let Some(stem) = name.strip_suffix(IMAGE_SUFFIX) {
            stems.entry(stem.to_owned()).or_default().image = true;
        } else if let Some(stem) = name.strip_suffix(GT_SUFFIX) {
            stems.entry(stem.to_owned()).or_default().gt = true;
        } else if let Some(stem) = name.strip_suffix(COARSE_SUFFIX) {
            stems.entry(stem.to_owned()).or_default().coarse = true;
        }
    }

    let mut cases = Vec::with_capacity(stems.len());
    for (stem, files) in stems {
        let missing: Vec<&str> = [
            (files.image, IMAGE_SUFFIX),
            (files.gt, GT_SUFFIX),
            (files.coarse, COARSE_SUFFIX),
        ]
        .into_iter()
        .filter(|(present, _)| !present)
        .map(|(_, s)| s)
        .collect();
        if !missing.is_empty() {
            return Err(StorageError::IncompleteCase {
                case_id: format!("{label}/{stem}"),
                missing: missing.join(", "),
            });
        }
        let image = png::read_gray(&dir.join(format!("{stem}{IMAGE_SUFFIX}")))?;
        let gt = png::read_mask(&dir.join(format!("{stem}{GT_SUFFIX}")))?;
        let coarse = npy::read_probmap(&dir.join(format!("{stem}{COARSE_SUFFIX}")))?;
        cases.push(CaseRecord::new(label, &stem, image, coarse, gt)?);
    }
    Ok(cases)
}

/// Writes one case in the layout [`ingest`] reads.
pub fn write_case(root: &Path, case: &CaseRecord) -> Result<(), StorageError> {
    let (domain, stem) = case
        .case_id
        .split_once('/')
        .ok_or_else(|| StorageError::MalformedJson(format!("case id {:?}", case.case_id)))?;
    let dir = root.join(domain);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    png::write_gray(&dir.join(format!("{stem}{IMAGE_SUFFIX}")), &case.image)?;
    png::write_mask(&dir.join(format!("{stem}{GT_SUFFIX}")), &case.gt_mask)?;
    npy::write_probmap(
        &dir.join(format!("{stem}{COARSE_SUFFIX}")),
        &case.coarse_map,
    )
}
