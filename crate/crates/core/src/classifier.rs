//! k-nearest-neighbor majority vote over a reference database.
//!
//! A query is normalized with the reference statistics, compared against
//! every reference row (linear scan) and assigned the most voted class among
//! its `k` nearest rows.
//!
//! Ordering rules:
//! - neighbors are ranked by `(distance, structure_id)`, so equal distances
//!   at the k-th position resolve by the lexicographically smaller id;
//! - a vote tie goes to the tied class whose nearest member is nearest, then
//!   to the lexicographically smaller class.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::descriptors::{FeatureVector, ATTRIBUTE_NAMES, NUM_ATTRIBUTES};
use crate::exec::Exec;
use crate::metrics::DistanceMeasure;
use crate::reference::{FeatureStats, ReferenceDb};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("reference database is empty")]
    EmptyDb,
    #[error("invalid attribute mask: {0}")]
    InvalidMask(String),
    #[error("k must be at least 1")]
    InvalidK,
}

/// Sorted, non-empty subset of attribute indices (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureMask(Vec<usize>);

impl FeatureMask {
    pub fn all() -> Self {
        Self((0..NUM_ATTRIBUTES).collect())
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Result<Self, ClassifyError> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(ClassifyError::InvalidMask("mask is empty".into()));
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= NUM_ATTRIBUTES) {
            return Err(ClassifyError::InvalidMask(format!("attribute index {bad} out of range")));
        }
        Ok(Self(v))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.0.len() == NUM_ATTRIBUTES
    }

    pub fn contains(&self, attribute: usize) -> bool {
        self.0.binary_search(&attribute).is_ok()
    }

    /// The mask minus one attribute, or `None` if that would leave it empty.
    pub fn without(&self, attribute: usize) -> Option<Self> {
        let rest: Vec<usize> = self.0.iter().copied().filter(|&i| i != attribute).collect();
        (!rest.is_empty()).then_some(Self(rest))
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|&i| ATTRIBUTE_NAMES[i]).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for FeatureMask {
    type Err = ClassifyError;

    /// Accepts `A15,A17` (also `a15`, `15`), 1-based.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut indices = Vec::new();
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let digits = token.strip_prefix(['A', 'a']).unwrap_or(token);
            let n: usize = digits
                .parse()
                .map_err(|_| ClassifyError::InvalidMask(format!("unknown attribute `{token}`")))?;
            if n == 0 || n > NUM_ATTRIBUTES {
                return Err(ClassifyError::InvalidMask(format!("unknown attribute `{token}`")));
            }
            indices.push(n - 1);
        }
        Self::from_indices(indices)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub structure_id: String,
    pub class: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub query_id: String,
    /// Ascending by distance.
    pub neighbors: Vec<Neighbor>,
    pub votes: BTreeMap<String, usize>,
    pub predicted_class: String,
    pub measure: String,
    pub k: usize,
}

impl Prediction {
    /// `A:2;B:1`, classes in lexicographic order.
    pub fn votes_string(&self) -> String {
        self.votes
            .iter()
            .map(|(c, n)| format!("{c}:{n}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A reference set normalized and projected once, ready to be scanned by
/// many queries.
#[derive(Clone, Debug)]
pub struct ScanView<'a> {
    db: &'a ReferenceDb,
    rows: Vec<usize>,
    mask: FeatureMask,
    stats: FeatureStats,
    /// `rows.len() x mask.len()`, row-major, normalized.
    matrix: Vec<f64>,
    /// Population variance of each masked, normalized column.
    variances: Vec<f64>,
}

impl<'a> ScanView<'a> {
    /// View over every row of `db`, using the database statistics.
    pub fn new(db: &'a ReferenceDb, mask: FeatureMask) -> Result<Self, ClassifyError> {
        if db.is_empty() {
            return Err(ClassifyError::EmptyDb);
        }
        Ok(Self::build(db, (0..db.len()).collect(), db.stats().clone(), mask))
    }

    /// View over every row except `held_out`, with statistics recomputed on
    /// the remaining rows.
    pub fn excluding(db: &'a ReferenceDb, held_out: usize, mask: FeatureMask) -> Result<Self, ClassifyError> {
        let rows: Vec<usize> = (0..db.len()).filter(|&i| i != held_out).collect();
        if rows.is_empty() {
            return Err(ClassifyError::EmptyDb);
        }
        let stats = FeatureStats::from_rows(rows.iter().map(|&i| &db.row(i).values));
        Ok(Self::build(db, rows, stats, mask))
    }

    fn build(db: &'a ReferenceDb, rows: Vec<usize>, stats: FeatureStats, mask: FeatureMask) -> Self {
        let d = mask.len();
        let mut matrix = Vec::with_capacity(rows.len() * d);
        for &i in &rows {
            let values = &db.row(i).values;
            matrix.extend(mask.indices().iter().map(|&j| stats.scale(j, values[j])));
        }
        let n = rows.len() as f64;
        let variances = (0..d)
            .map(|c| {
                let mean = matrix.iter().skip(c).step_by(d).sum::<f64>() / n;
                matrix.iter().skip(c).step_by(d).map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
            })
            .collect();
        Self {
            db,
            rows,
            mask,
            stats,
            matrix,
            variances,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn stats(&self) -> &FeatureStats {
        &self.stats
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Normalized, masked coordinates of reference row `r` of this view.
    pub fn row_values(&self, r: usize) -> &[f64] {
        let d = self.mask.len();
        &self.matrix[r * d..(r + 1) * d]
    }

    /// Normalizes a raw query vector with this view's statistics and mask.
    pub fn project(&self, values: &[f64; NUM_ATTRIBUTES]) -> Vec<f64> {
        self.mask.indices().iter().map(|&j| self.stats.scale(j, values[j])).collect()
    }

    /// Distances from a projected query to every row of the view, in view order.
    pub fn distances(&self, projected: &[f64], measure: &DistanceMeasure) -> Vec<f64> {
        let d = self.mask.len();
        self.matrix
            .chunks_exact(d)
            .map(|row| measure.distance_unchecked(projected, row, &self.variances))
            .collect()
    }

    /// The `k` nearest rows to a projected query, ascending.
    pub fn nearest(&self, projected: &[f64], k: usize, measure: &DistanceMeasure) -> Vec<Neighbor> {
        let d = self.mask.len();
        let k = k.min(self.rows.len());
        let mut heap: BinaryHeap<Candidate<'_>> = BinaryHeap::with_capacity(k + 1);
        for (r, row) in self.matrix.chunks_exact(d).enumerate() {
            let cand = Candidate {
                distance: measure.distance_unchecked(projected, row, &self.variances),
                id: &self.db.row(self.rows[r]).structure_id,
                row: r,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if cand < *heap.peek().expect("k >= 1") {
                heap.pop();
                heap.push(cand);
            }
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                structure_id: c.id.to_string(),
                class: self.db.label(self.rows[c.row]).to_string(),
                distance: c.distance,
            })
            .collect()
    }

    pub fn classify(
        &self,
        query: &FeatureVector,
        k: usize,
        measure: &DistanceMeasure,
    ) -> Result<Prediction, ClassifyError> {
        if k == 0 {
            return Err(ClassifyError::InvalidK);
        }
        let projected = self.project(&query.values);
        let neighbors = self.nearest(&projected, k, measure);
        let (votes, predicted_class) = vote(&neighbors);
        Ok(Prediction {
            query_id: query.structure_id.clone(),
            neighbors,
            votes,
            predicted_class,
            measure: measure.to_string(),
            k,
        })
    }
}

struct Candidate<'a> {
    distance: f64,
    id: &'a str,
    row: usize,
}

impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.id.cmp(other.id))
            .then_with(|| self.row.cmp(&other.row))
    }
}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

/// Tallies votes over neighbors sorted ascending and picks the winner.
fn vote(neighbors: &[Neighbor]) -> (BTreeMap<String, usize>, String) {
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    let mut nearest: BTreeMap<&str, f64> = BTreeMap::new();
    for n in neighbors {
        *votes.entry(n.class.clone()).or_default() += 1;
        nearest.entry(&n.class).or_insert(n.distance);
    }
    let top = votes.values().copied().max().unwrap_or(0);
    let winner = votes
        .iter()
        .filter(|(_, &count)| count == top)
        .map(|(class, _)| (nearest[class.as_str()], class))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, class)| class.clone())
        .unwrap_or_default();
    (votes, winner)
}

fn resolve_mask(mask: Option<&FeatureMask>) -> FeatureMask {
    mask.cloned().unwrap_or_else(FeatureMask::all)
}

/// Classifies one query against the whole database.
///
/// For `std-euclidean` the per-attribute variances always come from the
/// normalized reference rows; variances carried by `measure` are ignored.
pub fn classify(
    query: &FeatureVector,
    db: &ReferenceDb,
    k: usize,
    measure: &DistanceMeasure,
    mask: Option<&FeatureMask>,
) -> Result<Prediction, ClassifyError> {
    if k == 0 {
        return Err(ClassifyError::InvalidK);
    }
    ScanView::new(db, resolve_mask(mask))?.classify(query, k, measure)
}

/// Classifies each query independently; output order follows input order.
pub fn classify_batch(
    queries: &[FeatureVector],
    db: &ReferenceDb,
    k: usize,
    measure: &DistanceMeasure,
    mask: Option<&FeatureMask>,
    exec: Exec,
) -> Vec<Result<Prediction, ClassifyError>> {
    if queries.is_empty() {
        return Vec::new();
    }
    match ScanView::new(db, resolve_mask(mask)) {
        Ok(view) => exec.map(queries, |q| view.classify(q, k, measure)),
        Err(e) => queries.iter().map(|_| Err(e.clone())).collect(),
    }
}
