//! The reference database: raw attribute vectors with class labels.
//!
//! Rows are stored unnormalized. Min/max/mean/variance statistics are
//! derived from the rows whenever they change (and on load), so a database
//! can grow one structure at a time without recomputing any descriptor.
//!
//! On-disk layout:
//!
//! ```text
//! #protnn-db v1
//! #delta=7
//! #attributes=A1,A2,...,A18
//! 1abc,kinase,3.0000000000000000e2,...
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::descriptors::{
    compute_features, DescriptorError, FeatureVector, ATTRIBUTE_NAMES, NUM_ATTRIBUTES,
};
use crate::exec::Exec;
use crate::graph::{build_graph, GraphBuildParams, GraphError};
use crate::manifest::ManifestEntry;
use crate::pdb::{parse_pdb_file, structure_id_for_path, IngestError, IngestOptions};

pub const FORMAT_MAGIC: &str = "#protnn-db";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("every structure failed to build ({} failures)", .0.failures.len())]
    AllStructuresFailed(BuildReport),
    #[error("structure id `{0}` is already present")]
    DuplicateStructureId(String),
    #[error("row `{0}` has no class label")]
    MissingLabel(String),
    #[error("row `{id}` has a non-finite value for {attribute}")]
    NonFiniteValue { id: String, attribute: &'static str },
    #[error("`{0}` cannot be stored: identifiers and labels may not contain commas, newlines or be empty")]
    InvalidIdentifier(String),
    #[error("database was built with delta={stored}, requested delta={requested}")]
    DeltaMismatch { stored: f64, requested: f64 },
    #[error("database format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// One structure that could not be turned into a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub added: Vec<String>,
    pub failures: Vec<BuildFailure>,
}

/// Per-attribute statistics over a set of rows. Variance is the population
/// variance.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub count: usize,
    pub min: [f64; NUM_ATTRIBUTES],
    pub max: [f64; NUM_ATTRIBUTES],
    pub mean: [f64; NUM_ATTRIBUTES],
    pub variance: [f64; NUM_ATTRIBUTES],
}

impl FeatureStats {
    pub fn from_rows<'a>(rows: impl Iterator<Item = &'a [f64; NUM_ATTRIBUTES]> + Clone) -> Self {
        let mut min = [f64::INFINITY; NUM_ATTRIBUTES];
        let mut max = [f64::NEG_INFINITY; NUM_ATTRIBUTES];
        let mut sum = [0.0; NUM_ATTRIBUTES];
        let mut count = 0usize;
        for row in rows.clone() {
            count += 1;
            for j in 0..NUM_ATTRIBUTES {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
                sum[j] += row[j];
            }
        }
        if count == 0 {
            return Self {
                count,
                min: [0.0; NUM_ATTRIBUTES],
                max: [0.0; NUM_ATTRIBUTES],
                mean: [0.0; NUM_ATTRIBUTES],
                variance: [0.0; NUM_ATTRIBUTES],
            };
        }
        let n = count as f64;
        let mean = sum.map(|s| s / n);
        let mut ss = [0.0; NUM_ATTRIBUTES];
        for row in rows {
            for j in 0..NUM_ATTRIBUTES {
                let d = row[j] - mean[j];
                ss[j] += d * d;
            }
        }
        Self {
            count,
            min,
            max,
            mean,
            variance: ss.map(|s| s / n),
        }
    }

    /// Min-max scaling of one attribute. Constant attributes map to 0 and
    /// values outside the reference range are not clipped.
    #[inline]
    pub fn scale(&self, attribute: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[attribute], self.max[attribute]);
        if hi > lo {
            (x - lo) / (hi - lo)
        } else {
            0.0
        }
    }
}

/// Min-max normalizes a full attribute vector with reference statistics.
pub fn normalize(values: &[f64; NUM_ATTRIBUTES], stats: &FeatureStats) -> [f64; NUM_ATTRIBUTES] {
    std::array::from_fn(|j| stats.scale(j, values[j]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceDb {
    name: String,
    params: GraphBuildParams,
    rows: Vec<FeatureVector>,
    stats: FeatureStats,
}

impl ReferenceDb {
    /// An empty database.
    pub fn new(params: GraphBuildParams) -> Self {
        Self {
            name: "db".to_string(),
            params,
            rows: Vec::new(),
            stats: FeatureStats::from_rows(std::iter::empty()),
        }
    }

    /// Database over already computed vectors; every row needs a label.
    pub fn from_rows(rows: Vec<FeatureVector>, params: GraphBuildParams) -> Result<Self, StoreError> {
        let mut db = Self::new(params);
        db.append_rows(rows)?;
        Ok(db)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> GraphBuildParams {
        self.params
    }

    pub fn version(&self) -> u32 {
        FORMAT_VERSION
    }

    pub fn attribute_names(&self) -> &'static [&'static str; NUM_ATTRIBUTES] {
        &ATTRIBUTE_NAMES
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &FeatureVector {
        &self.rows[i]
    }

    /// Class label of row `i`.
    pub fn label(&self, i: usize) -> &str {
        self.rows[i].label.as_deref().expect("rows are validated to carry labels")
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn stats(&self) -> &FeatureStats {
        &self.stats
    }

    pub fn contains(&self, structure_id: &str) -> bool {
        self.rows.iter().any(|r| r.structure_id == structure_id)
    }

    /// Appends rows after validating all of them; on error nothing changes.
    pub fn append_rows(&mut self, new_rows: Vec<FeatureVector>) -> Result<(), StoreError> {
        let mut ids: HashSet<&str> = self.rows.iter().map(|r| r.structure_id.as_str()).collect();
        for row in &new_rows {
            validate_row(row)?;
            if !ids.insert(row.structure_id.as_str()) {
                return Err(StoreError::DuplicateStructureId(row.structure_id.clone()));
            }
        }
        self.rows.extend(new_rows);
        self.refresh_stats();
        Ok(())
    }

    fn refresh_stats(&mut self) {
        self.stats = FeatureStats::from_rows(self.rows.iter().map(|r| &r.values));
    }

    /// Featurizes new structures and appends them. Existing rows are left
    /// untouched; only the statistics are recomputed. A structure id that is
    /// already present (or repeated in `entries`) aborts the whole update.
    pub fn add_structures(
        &mut self,
        entries: &[ManifestEntry],
        params: GraphBuildParams,
        exec: Exec,
    ) -> Result<BuildReport, StoreError> {
        if params != self.params {
            return Err(StoreError::DeltaMismatch {
                stored: self.params.delta(),
                requested: params.delta(),
            });
        }
        let mut ids: HashSet<String> = self.rows.iter().map(|r| r.structure_id.clone()).collect();
        for entry in entries {
            let id = structure_id_for_path(&entry.path);
            if !ids.insert(id.clone()) {
                return Err(StoreError::DuplicateStructureId(id));
            }
        }
        let (rows, report) = featurize_entries(entries, params, exec);
        self.append_rows(rows)?;
        Ok(report)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{FORMAT_MAGIC} v{FORMAT_VERSION}\n"));
        out.push_str(&format!("#delta={}\n", self.params.delta()));
        out.push_str(&format!("#attributes={}\n", ATTRIBUTE_NAMES.join(",")));
        for row in &self.rows {
            out.push_str(&row.to_csv_row());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, StoreError> {
        let format = |line: usize, reason: String| StoreError::Format { line, reason };
        let mut lines = text.lines().enumerate();

        let (_, magic) = lines.next().ok_or_else(|| format(1, "empty file".into()))?;
        let version = magic
            .strip_prefix(FORMAT_MAGIC)
            .and_then(|rest| rest.trim().strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| format(1, format!("expected `{FORMAT_MAGIC} v{FORMAT_VERSION}`")))?;
        if version != FORMAT_VERSION {
            return Err(format(1, format!("unsupported format version {version}")));
        }

        let (_, delta_line) = lines.next().ok_or_else(|| format(2, "missing delta line".into()))?;
        let delta = delta_line
            .strip_prefix("#delta=")
            .and_then(|d| d.trim().parse::<f64>().ok())
            .ok_or_else(|| format(2, "expected `#delta=<float>`".into()))?;
        let params = GraphBuildParams::new(delta).map_err(|e| format(2, e.to_string()))?;

        let (_, attr_line) = lines.next().ok_or_else(|| format(3, "missing attributes line".into()))?;
        let names: Vec<&str> = attr_line
            .strip_prefix("#attributes=")
            .ok_or_else(|| format(3, "expected `#attributes=...`".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if names != ATTRIBUTE_NAMES {
            return Err(format(3, format!("unsupported attribute list {names:?}")));
        }

        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 + NUM_ATTRIBUTES {
                return Err(format(idx + 1, format!("expected {} fields, found {}", 2 + NUM_ATTRIBUTES, fields.len())));
            }
            let mut values = [0.0; NUM_ATTRIBUTES];
            for (slot, field) in values.iter_mut().zip(&fields[2..]) {
                *slot = field
                    .trim()
                    .parse()
                    .map_err(|_| format(idx + 1, format!("bad number {field:?}")))?;
            }
            rows.push(FeatureVector::new(fields[0], Some(fields[1].to_string()), values));
        }
        Self::from_rows(rows, params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text)?.with_name(structure_id_for_path(path)))
    }

    /// Writes to a temporary file next to `path` and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        write_atomic(path.as_ref(), self.to_file_string().as_bytes())
    }
}

/// Whole-file replace: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn valid_identifier(s: &str) -> bool {
    !s.is_empty() && !s.contains([',', '\n', '\r'])
}

fn validate_row(row: &FeatureVector) -> Result<(), StoreError> {
    if !valid_identifier(&row.structure_id) {
        return Err(StoreError::InvalidIdentifier(row.structure_id.clone()));
    }
    match row.label.as_deref() {
        None => return Err(StoreError::MissingLabel(row.structure_id.clone())),
        Some(label) if !valid_identifier(label) => return Err(StoreError::InvalidIdentifier(label.to_string())),
        Some(_) => {}
    }
    if let Some(j) = row.values.iter().position(|v| !v.is_finite()) {
        return Err(StoreError::NonFiniteValue {
            id: row.structure_id.clone(),
            attribute: ATTRIBUTE_NAMES[j],
        });
    }
    Ok(())
}

/// Parse, build the contact graph and compute attributes for one file.
pub fn featurize_file(
    path: impl AsRef<Path>,
    options: &IngestOptions,
    params: GraphBuildParams,
) -> Result<FeatureVector, StoreError> {
    let record = parse_pdb_file(path, options)?;
    let graph = build_graph(&record, params)?;
    Ok(compute_features(&graph)?)
}

fn featurize_entries(entries: &[ManifestEntry], params: GraphBuildParams, exec: Exec) -> (Vec<FeatureVector>, BuildReport) {
    let options = IngestOptions::default();
    let results = exec.map(entries, |entry| {
        featurize_file(&entry.path, &options, params).map(|v| v.with_label(entry.label.clone()))
    });
    let mut rows = Vec::new();
    let mut report = BuildReport::default();
    let mut seen = HashSet::new();
    for (entry, result) in entries.iter().zip(results) {
        let outcome = result.and_then(|row| {
            validate_row(&row)?;
            if !seen.insert(row.structure_id.clone()) {
                return Err(StoreError::DuplicateStructureId(row.structure_id));
            }
            Ok(row)
        });
        match outcome {
            Ok(row) => {
                report.added.push(row.structure_id.clone());
                rows.push(row);
            }
            Err(e) => report.failures.push(BuildFailure {
                path: entry.path.clone(),
                error: e.to_string(),
            }),
        }
    }
    (rows, report)
}

/// Builds a database from labeled structure files. Structures that fail to
/// parse are listed in the report; statistics are computed once at the end.
pub fn build_db(
    entries: &[ManifestEntry],
    params: GraphBuildParams,
    exec: Exec,
) -> Result<(ReferenceDb, BuildReport), StoreError> {
    let (rows, report) = featurize_entries(entries, params, exec);
    if rows.is_empty() {
        return Err(StoreError::AllStructuresFailed(report));
    }
    let db = ReferenceDb::from_rows(rows, params)?;
    Ok((db, report))
}
