//! Residue contact graphs: nodes are residues, edges join residues whose Cα
//! atoms lie within `delta` angstroms of each other (inclusive).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::pdb::StructureRecord;

/// Contact threshold used when none is given, in angstroms.
pub const DEFAULT_DELTA: f64 = 7.0;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("structure {0} has no residues")]
    EmptyStructure(String),
    #[error("contact threshold must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("edge ({0}, {1}) is out of range or a self-loop")]
    InvalidEdge(usize, usize),
    #[error("malformed graph dump at line {line}: {reason}")]
    MalformedDump { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphBuildParams {
    delta: f64,
}

impl GraphBuildParams {
    pub fn new(delta: f64) -> Result<Self, GraphError> {
        if delta.is_finite() && delta > 0.0 {
            Ok(Self { delta })
        } else {
            Err(GraphError::InvalidDelta(delta))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for GraphBuildParams {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA }
    }
}

/// Labeled, undirected, simple graph.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted ascending; each
/// node additionally keeps a sorted neighbor list.
#[derive(Clone, Debug, PartialEq)]
pub struct ProteinGraph {
    structure_id: String,
    node_labels: Vec<String>,
    edges: Vec<(u32, u32)>,
    neighbors: Vec<Vec<u32>>,
}

impl ProteinGraph {
    /// Builds a graph from an arbitrary edge list. Duplicate and reversed
    /// edges collapse; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(
        structure_id: impl Into<String>,
        node_labels: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let n = node_labels.len();
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(GraphError::InvalidEdge(a, b));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            list.push((i as u32, j as u32));
        }
        Ok(Self::from_sorted_unique(structure_id.into(), node_labels, list))
    }

    fn from_sorted_unique(structure_id: String, node_labels: Vec<String>, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut neighbors = vec![Vec::new(); node_labels.len()];
        for &(i, j) in &edges {
            neighbors[i as usize].push(j);
            neighbors[j as usize].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self {
            structure_id,
            node_labels,
            edges,
            neighbors,
        }
    }

    pub fn structure_id(&self) -> &str {
        &self.structure_id
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.node_labels[node]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors
            .get(a)
            .is_some_and(|list| list.binary_search(&(b as u32)).is_ok())
    }

    /// Same graph with node `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.node_count());
        let mut labels = vec![String::new(); perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.node_labels[old].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i as usize] as u32, perm[j as usize] as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        Self::from_sorted_unique(self.structure_id.clone(), labels, edges)
    }

    /// Text dump: `#nodes <n>`, then `index label` per node, then `i j` per
    /// edge, all ascending.
    pub fn to_dump(&self) -> String {
        let mut out = format!("#nodes {}\n", self.node_count());
        for (i, label) in self.node_labels.iter().enumerate() {
            let _ = writeln!(out, "{i} {label}");
        }
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn from_dump(structure_id: impl Into<String>, text: &str) -> Result<Self, GraphError> {
        let malformed = |line: usize, reason: &str| GraphError::MalformedDump {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty dump"))?;
        let n: usize = header
            .strip_prefix("#nodes")
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| malformed(1, "expected `#nodes <n>`"))?;
        let mut labels = Vec::with_capacity(n);
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(malformed(idx + 1, "expected two fields"));
            };
            let a: usize = a.parse().map_err(|_| malformed(idx + 1, "bad index"))?;
            if labels.len() < n {
                if a != labels.len() {
                    return Err(malformed(idx + 1, "node indices must be ascending from 0"));
                }
                labels.push(b.to_string());
            } else {
                let b: usize = b.parse().map_err(|_| malformed(idx + 1, "bad index"))?;
                edges.push((a, b));
            }
        }
        if labels.len() != n {
            return Err(malformed(text.lines().count(), "fewer node lines than declared"));
        }
        Self::from_edges(structure_id, labels, edges)
    }
}

/// Builds the contact graph of a structure.
///
/// Candidate pairs come from a uniform grid with cell size `delta`; each
/// candidate is then tested with the exact Euclidean distance, so the edge
/// set equals the all-pairs threshold relation.
pub fn build_graph(record: &StructureRecord, params: GraphBuildParams) -> Result<ProteinGraph, GraphError> {
    if record.residues.is_empty() {
        return Err(GraphError::EmptyStructure(record.structure_id.clone()));
    }
    let points: Vec<[f64; 3]> = record.residues.iter().map(|r| r.ca_position).collect();
    let labels = record.residues.iter().map(|r| r.label.clone()).collect();
    let edges = contact_pairs(&points, params.delta);
    Ok(ProteinGraph::from_sorted_unique(record.structure_id.clone(), labels, edges))
}

/// Euclidean distance in R^3.
pub fn distance3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn contact_pairs(points: &[[f64; 3]], delta: f64) -> Vec<(u32, u32)> {
    // Slightly oversized cells keep every contact inside the 27-cell
    // neighborhood despite rounding in the division.
    let cell = delta * (1.0 + 1e-9);
    let cell_of = |p: &[f64; 3]| -> [i64; 3] {
        [
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell_of(p)).or_default().push(i as u32);
    }

    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let c = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if (j as usize) > i && distance3(p, &points[j as usize]) <= delta {
                            edges.push((i as u32, j));
                        }
                    }
                }
            }
        }
    }
    edges
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
}

/// Node, edge and connected-component counts, by full traversal.
pub fn graph_stats(g: &ProteinGraph) -> GraphStats {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v as usize);
                }
            }
        }
    }
    let degree_sum: usize = (0..n).map(|u| g.degree(u)).sum();
    GraphStats {
        nodes: n,
        edges: degree_sum / 2,
        components,
    }
}
