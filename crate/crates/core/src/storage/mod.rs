//! File formats: PNG masks, NPY probability maps, JSON manifests and
//! reports, and the dataset directory layout.

pub mod dataset;
pub mod manifest;
pub mod npy;
pub mod png;
pub mod report;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::compose::ComposeError;

pub use dataset::{ingest, ingest_domains, write_case, CaseRecord, Dataset, DomainSplit};
pub use manifest::{
    parse_manifest, prediction_path, read_manifest, write_manifest, ManifestComposite,
    PromptManifest, SCHEMA_VERSION,
};
pub use npy::{read_probmap, write_probmap};
pub use png::{read_gray, read_gray_probmap, read_mask, write_gray, write_mask};
pub use report::{read_report, render_report, write_report, ReportFormat};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unsupported PNG ({color}); expected single-channel 8-bit")]
    UnsupportedPng { path: PathBuf, color: String },
    #[error("{path}: cannot decode PNG: {reason}")]
    PngDecode { path: PathBuf, reason: String },
    #[error("not an NPY file (bad magic)")]
    BadMagic,
    #[error("unsupported NPY version {0}.{1}")]
    UnsupportedVersion(u8, u8),
    #[error("bad NPY header: {0}")]
    BadHeader(String),
    #[error("NPY dtype {0:?} is not '<f4'")]
    WrongDtype(String),
    #[error("expected a 2-D array, got rank {0}")]
    WrongRank(usize),
    #[error("Fortran-ordered arrays are not supported")]
    FortranOrder,
    #[error("NPY payload is {actual} bytes, expected {expected}")]
    PayloadSize { expected: usize, actual: usize },
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRangeValue { index: usize, value: f32 },
    #[error("{path}: {inner}")]
    InFile {
        path: PathBuf,
        inner: Box<StorageError>,
    },
    #[error("manifest schema version {found} is not supported (expected {supported})")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("manifest geometry: {0}")]
    Containment(ComposeError),
    #[error("duplicate composite id {0:?}")]
    DuplicateCompositeId(String),
    #[error("dataset not found: {0}")]
    DatasetMissing(PathBuf),
    #[error("case {case_id} is missing {missing}")]
    IncompleteCase { case_id: String, missing: String },
    #[error("case {case_id}: {detail}")]
    CaseDimensions { case_id: String, detail: String },
}

impl StorageError {
    /// Attaches a file path to format errors.
    pub(crate) fn at(self, path: &Path) -> Self {
        match self {
            e @ (StorageError::Io { .. } | StorageError::InFile { .. }) => e,
            other => StorageError::InFile {
                path: path.to_owned(),
                inner: Box::new(other),
            },
        }
    }

    /// The underlying error with any file context removed.
    pub fn root(&self) -> &StorageError {
        match self {
            StorageError::InFile { inner, .. } => inner.root(),
            other => other,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self.root(),
            StorageError::Io { .. } | StorageError::DatasetMissing(_)
        )
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StorageError + '_ {
    move |source| StorageError::Io {
        path: path.to_owned(),
        source,
    }
}
