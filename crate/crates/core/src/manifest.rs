//! Labeled structure manifests: a CSV with header `path,label`.

use std::collections::HashSet;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("manifest CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("manifest lists {} more than once", .0.display())]
    DuplicatePath(PathBuf),
    #[error("manifest has no data rows")]
    EmptyManifest,
    #[error("row {row}: empty {field}")]
    EmptyField { row: usize, field: &'static str },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
}

impl ManifestEntry {
    pub fn new(path: impl Into<PathBuf>, label: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            label: label.into(),
        }
    }
}

/// Reads a manifest. Relative paths are joined to the manifest's directory;
/// whether they exist is only checked when the structure is parsed.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, ManifestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    read_manifest(file, base)
}

/// Reads manifest rows from any reader, resolving paths against `base`.
pub fn read_manifest<R: io::Read>(reader: R, base: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(ManifestError::MissingColumn(name))
    };
    let path_col = col("path")?;
    let label_col = col("label")?;

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let raw_path = row.get(path_col).unwrap_or("");
        let label = row.get(label_col).unwrap_or("");
        if raw_path.is_empty() {
            return Err(ManifestError::EmptyField { row: i + 1, field: "path" });
        }
        if label.is_empty() {
            return Err(ManifestError::EmptyField { row: i + 1, field: "label" });
        }
        let resolved = base.join(raw_path);
        if !seen.insert(resolved.clone()) {
            return Err(ManifestError::DuplicatePath(resolved));
        }
        entries.push(ManifestEntry::new(resolved, label));
    }
    if entries.is_empty() {
        return Err(ManifestError::EmptyManifest);
    }
    Ok(entries)
}
