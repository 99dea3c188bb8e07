//! Seeded synthetic inputs: protein-like Cα chains, random labeled graphs
//! and random attribute matrices. Used by the benchmarks, the `bench`
//! subcommand and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptors::{FeatureVector, NUM_ATTRIBUTES};
use crate::graph::ProteinGraph;
use crate::pdb::{Residue, StructureRecord};

pub const AMINO_ACIDS: [&str; 20] = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS", "MET", "PHE",
    "PRO", "SER", "THR", "TRP", "TYR", "VAL",
];

/// Consecutive Cα–Cα distance of a trans peptide, in angstroms.
pub const CA_CA_DISTANCE: f64 = 3.8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|x| x / n);
        }
    }
}

/// Shape of a synthetic chain.
#[derive(Clone, Copy, Debug)]
pub struct ChainShape {
    pub residues: usize,
    /// Pull towards the centroid in `[0, 1)`; larger values give denser folds.
    pub compactness: f64,
    /// Minimum distance between non-consecutive residues.
    pub excluded_volume: f64,
}

impl Default for ChainShape {
    fn default() -> Self {
        Self {
            residues: 150,
            compactness: 0.3,
            excluded_volume: 4.0,
        }
    }
}

/// A self-avoiding random walk with 3.8 Å steps and a centroid bias.
pub fn random_chain(rng: &mut impl Rng, structure_id: &str, shape: ChainShape) -> StructureRecord {
    let mut points: Vec<[f64; 3]> = Vec::with_capacity(shape.residues);
    let mut centroid = [0.0; 3];
    for i in 0..shape.residues {
        let p = if i == 0 {
            [0.0; 3]
        } else {
            let last = points[i - 1];
            let mut chosen = None;
            for _ in 0..64 {
                let mut dir = unit_vector(rng);
                let to_center: [f64; 3] = std::array::from_fn(|a| centroid[a] / i as f64 - last[a]);
                let norm = to_center.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    for a in 0..3 {
                        dir[a] = (1.0 - shape.compactness) * dir[a] + shape.compactness * to_center[a] / norm;
                    }
                    let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    dir = dir.map(|x| x / n);
                }
                let cand: [f64; 3] = std::array::from_fn(|a| last[a] + CA_CA_DISTANCE * dir[a]);
                let clash = points[..i - 1].iter().any(|q| crate::graph::distance3(q, &cand) < shape.excluded_volume);
                if !clash {
                    chosen = Some(cand);
                    break;
                }
                chosen.get_or_insert(cand);
            }
            chosen.expect("at least one candidate")
        };
        // Coordinates are stored at PDB precision.
        let p = p.map(|x| (x * 1000.0).round() / 1000.0);
        for a in 0..3 {
            centroid[a] += p[a];
        }
        points.push(p);
    }
    let residues = points
        .into_iter()
        .enumerate()
        .map(|(i, ca_position)| Residue {
            label: AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())].to_string(),
            chain_id: 'A',
            seq_number: i as i32 + 1,
            insertion_code: None,
            ca_position,
        })
        .collect();
    StructureRecord {
        structure_id: structure_id.to_string(),
        residues,
        source_path: String::new(),
        stats: Default::default(),
    }
}

/// Erdős–Rényi graph `G(n, p)` with labels drawn from the first
/// `label_alphabet` amino-acid codes.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, label_alphabet: usize) -> ProteinGraph {
    let alphabet = label_alphabet.clamp(1, AMINO_ACIDS.len());
    let labels = (0..n)
        .map(|_| AMINO_ACIDS[rng.random_range(0..alphabet)].to_string())
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    ProteinGraph::from_edges("random", labels, edges).expect("edges are in range")
}

/// Random attribute rows with labels cycling through `classes` names.
pub fn random_feature_rows(rng: &mut impl Rng, rows: usize, classes: usize) -> Vec<FeatureVector> {
    let classes = classes.max(1);
    (0..rows)
        .map(|i| {
            let values: [f64; NUM_ATTRIBUTES] = std::array::from_fn(|_| rng.random_range(0.0..100.0));
            FeatureVector::new(format!("r{i:07}"), Some(format!("class{}", i % classes)), values)
        })
        .collect()
}
