//! Structural and topological embedding of a contact graph.
//!
//! | index | name | meaning |
//! |-------|------|---------|
//! | A1  | nodes | `|V|` |
//! | A2  | edges | `|E|` |
//! | A3  | average degree | mean of `deg(u)` |
//! | A4  | density | `2|E| / (|V| (|V| - 1))`, 0 for one node |
//! | A5  | average clustering coefficient | `c(u) = 2 e_u / (k_u (k_u - 1))`, 0 when `k_u < 2` |
//! | A6  | average effective eccentricity | mean of `e(u)` over reachable nodes |
//! | A7  | effective diameter | max `e(u)` |
//! | A8  | effective radius | min `e(u)` |
//! | A9  | closeness centrality | mean of `r_u / sum d(u, v)` over reachable `v` |
//! | A10 | central nodes | fraction with `e(u) = A8` |
//! | A11 | end points | fraction with `deg(u) = 1` |
//! | A12 | distinct eigenvalues | of the adjacency matrix, tolerance grouped |
//! | A13 | spectral radius | `max |lambda|` |
//! | A14 | second largest eigenvalue | descending index 1 (index 0 for one node) |
//! | A15 | energy | `sum lambda^2` |
//! | A16 | neighborhood impurity | mean count of distinct neighbor labels differing from the node's |
//! | A17 | link impurity | fraction of edges with differing endpoint labels |
//! | A18 | label entropy | base-2 Shannon entropy of the label distribution |
//!
//! Graphs may be disconnected. Eccentricity and closeness only look at the
//! nodes reachable from `u`; an isolated node has `e(u) = 0` and closeness 0.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::eigen::{NoConvergence, SymmetricMatrix};
use crate::graph::ProteinGraph;

pub const NUM_ATTRIBUTES: usize = 18;

pub const ATTRIBUTE_NAMES: [&str; NUM_ATTRIBUTES] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13", "A14", "A15",
    "A16", "A17", "A18",
];

pub const ATTRIBUTE_DESCRIPTIONS: [&str; NUM_ATTRIBUTES] = [
    "number of nodes",
    "number of edges",
    "average degree",
    "density",
    "average clustering coefficient",
    "average effective eccentricity",
    "effective diameter",
    "effective radius",
    "closeness centrality",
    "percentage of central nodes",
    "percentage of end points",
    "number of distinct eigenvalues",
    "spectral radius",
    "second largest eigenvalue",
    "energy",
    "neighborhood impurity",
    "link impurity",
    "label entropy",
];

/// Relative tolerance under which two adjacency eigenvalues count as equal.
pub const EIGENVALUE_DISTINCTNESS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum DescriptorError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("eigensolver failed on structure {structure_id}: {source}")]
    EigensolverFailure {
        structure_id: String,
        #[source]
        source: NoConvergence,
    },
}

/// Attribute values of one structure; `values[i]` holds attribute `A(i+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub structure_id: String,
    pub label: Option<String>,
    pub values: [f64; NUM_ATTRIBUTES],
}

impl FeatureVector {
    pub fn new(structure_id: impl Into<String>, label: Option<String>, values: [f64; NUM_ATTRIBUTES]) -> Self {
        Self {
            structure_id: structure_id.into(),
            label,
            values,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// `structure_id,label,A1,...,A18` with 17 significant digits.
    pub fn to_csv_row(&self) -> String {
        let mut row = format!("{},{}", self.structure_id, self.label.as_deref().unwrap_or(""));
        for v in &self.values {
            row.push(',');
            row.push_str(&format_real(*v));
        }
        row
    }
}

/// Header line for [`FeatureVector::to_csv_row`].
pub fn csv_header() -> String {
    let mut header = String::from("structure_id,label");
    for name in ATTRIBUTE_NAMES {
        let _ = write!(header, ",{name}");
    }
    header
}

/// Scientific notation with 17 significant digits; parses back bit-exactly.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Adjacency spectrum, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub distinctness_tolerance: f64,
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// Single-linkage grouping over the sorted list: a new group starts when
    /// consecutive eigenvalues differ by more than the tolerance.
    pub fn distinct_count(&self) -> usize {
        if self.eigenvalues.is_empty() {
            return 0;
        }
        1 + self
            .eigenvalues
            .windows(2)
            .filter(|w| w[0] - w[1] > self.distinctness_tolerance)
            .count()
    }

    pub fn second_largest(&self) -> f64 {
        match self.eigenvalues.as_slice() {
            [] => 0.0,
            [only] => *only,
            [_, second, ..] => *second,
        }
    }

    pub fn energy(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }
}

/// Full spectrum of the 0/1 adjacency matrix.
pub fn eigen_spectrum(g: &ProteinGraph) -> Result<Spectrum, DescriptorError> {
    let n = g.node_count();
    if n == 0 {
        return Err(DescriptorError::EmptyGraph);
    }
    let mut a = SymmetricMatrix::zeros(n);
    for &(i, j) in g.edges() {
        a.set(i as usize, j as usize, 1.0);
    }
    let eigenvalues = a.eigenvalues().map_err(|source| DescriptorError::EigensolverFailure {
        structure_id: g.structure_id().to_string(),
        source,
    })?;
    let radius = eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    Ok(Spectrum {
        eigenvalues,
        distinctness_tolerance: EIGENVALUE_DISTINCTNESS * radius.max(1.0),
    })
}

/// Per-node BFS results over reachable nodes only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSummary {
    pub eccentricity: Vec<u32>,
    pub distance_sum: Vec<u64>,
    /// Nodes reachable from `u`, excluding `u` itself.
    pub reachable: Vec<u32>,
}

pub fn all_pairs_shortest_paths(g: &ProteinGraph) -> PathSummary {
    let n = g.node_count();
    let mut summary = PathSummary {
        eccentricity: vec![0; n],
        distance_sum: vec![0; n],
        reachable: vec![0; n],
    };
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut touched = Vec::with_capacity(n);
    for source in 0..n {
        dist[source] = 0;
        touched.push(source);
        queue.push_back(source);
        let (mut ecc, mut sum, mut count) = (0u32, 0u64, 0u32);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &v in g.neighbors(u) {
                let v = v as usize;
                if dist[v] == u32::MAX {
                    dist[v] = du + 1;
                    ecc = ecc.max(du + 1);
                    sum += u64::from(du + 1);
                    count += 1;
                    touched.push(v);
                    queue.push_back(v);
                }
            }
        }
        summary.eccentricity[source] = ecc;
        summary.distance_sum[source] = sum;
        summary.reachable[source] = count;
        for v in touched.drain(..) {
            dist[v] = u32::MAX;
        }
    }
    summary
}

/// Computes all 18 attributes. The returned vector carries no class label.
pub fn compute_features(g: &ProteinGraph) -> Result<FeatureVector, DescriptorError> {
    let n = g.node_count();
    if n == 0 {
        return Err(DescriptorError::EmptyGraph);
    }
    let nf = n as f64;
    let m = g.edge_count();
    let mut v = [0.0; NUM_ATTRIBUTES];

    v[0] = nf;
    v[1] = m as f64;
    v[2] = 2.0 * m as f64 / nf;
    v[3] = if n > 1 { 2.0 * m as f64 / (nf * (nf - 1.0)) } else { 0.0 };
    v[4] = (0..n).map(|u| clustering(g, u)).sum::<f64>() / nf;

    let paths = all_pairs_shortest_paths(g);
    let ecc = &paths.eccentricity;
    v[5] = ecc.iter().map(|&e| f64::from(e)).sum::<f64>() / nf;
    let diameter = *ecc.iter().max().expect("n >= 1");
    let radius = *ecc.iter().min().expect("n >= 1");
    v[6] = f64::from(diameter);
    v[7] = f64::from(radius);
    v[8] = (0..n)
        .map(|u| match paths.distance_sum[u] {
            0 => 0.0,
            s => f64::from(paths.reachable[u]) / s as f64,
        })
        .sum::<f64>()
        / nf;
    v[9] = ecc.iter().filter(|&&e| e == radius).count() as f64 / nf;
    v[10] = (0..n).filter(|&u| g.degree(u) == 1).count() as f64 / nf;

    let spectrum = eigen_spectrum(g)?;
    v[11] = spectrum.distinct_count() as f64;
    v[12] = spectrum.spectral_radius();
    v[13] = spectrum.second_largest();
    v[14] = spectrum.energy();

    let (label_ids, label_count) = intern_labels(g.node_labels());
    v[15] = neighborhood_impurity(g, &label_ids) / nf;
    v[16] = if m == 0 {
        0.0
    } else {
        let impure = g
            .edges()
            .iter()
            .filter(|&&(i, j)| label_ids[i as usize] != label_ids[j as usize])
            .count();
        impure as f64 / m as f64
    };
    v[17] = label_entropy(&label_ids, label_count);

    Ok(FeatureVector::new(g.structure_id(), None, v))
}

fn clustering(g: &ProteinGraph, u: usize) -> f64 {
    let nbrs = g.neighbors(u);
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    // Each link among the neighbors of u is seen from both ends.
    let twice_links: usize = nbrs
        .iter()
        .map(|&v| sorted_intersection_len(nbrs, g.neighbors(v as usize)))
        .sum();
    twice_links as f64 / (k * (k - 1)) as f64
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn intern_labels(labels: &[String]) -> (Vec<u32>, usize) {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let interned = labels
        .iter()
        .map(|l| {
            let next = ids.len() as u32;
            *ids.entry(l.as_str()).or_insert(next)
        })
        .collect();
    (interned, ids.len())
}

/// Sum over nodes of the number of distinct neighbor labels that differ from
/// the node's own label.
fn neighborhood_impurity(g: &ProteinGraph, label_ids: &[u32]) -> f64 {
    let mut scratch: Vec<u32> = Vec::new();
    let mut total = 0usize;
    for u in 0..g.node_count() {
        let own = label_ids[u];
        scratch.clear();
        scratch.extend(
            g.neighbors(u)
                .iter()
                .map(|&v| label_ids[v as usize])
                .filter(|&l| l != own),
        );
        scratch.sort_unstable();
        scratch.dedup();
        total += scratch.len();
    }
    total as f64
}

fn label_entropy(label_ids: &[u32], label_count: usize) -> f64 {
    let mut counts = vec![0usize; label_count];
    for &l in label_ids {
        counts[l as usize] += 1;
    }
    let n = label_ids.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * (n / c as f64).log2()
        })
        .sum()
}
