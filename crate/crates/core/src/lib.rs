//! Residue contact graphs and nearest-neighbor function prediction.
//!
//! The pipeline turns a PDB coordinate file into a labeled residue contact
//! graph, embeds the graph into an 18-dimensional vector of structural and
//! topological attributes, and predicts the class of a query structure by a
//! majority vote over its `k` nearest reference vectors.
//!
//! ```no_run
//! use resgraph::{
//!     build_db, classify, load_manifest, DistanceMeasure, Exec, GraphBuildParams, MeasureKind,
//! };
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let entries = load_manifest("reference/manifest.csv")?;
//! let (db, report) = build_db(&entries, GraphBuildParams::default(), Exec::Sequential)?;
//! assert!(report.failures.is_empty());
//!
//! let query = resgraph::featurize_file("query.pdb", &Default::default(), db.params())?;
//! let measure = DistanceMeasure::new(MeasureKind::StdEuclidean);
//! let prediction = classify(&query, &db, 1, &measure, None)?;
//! println!("{} -> {}", prediction.query_id, prediction.predicted_class);
//! # Ok(())
//! # }
//! ```
//!
//! Batch work (descriptors over many structures, leave-one-out folds, RFE
//! candidates) accepts an [`Exec`] mode. With the `parallel` feature
//! disabled every mode runs sequentially.

pub mod classifier;
pub mod descriptors;
pub mod eigen;
pub mod eval;
pub mod exec;
pub mod graph;
pub mod manifest;
pub mod metrics;
pub mod pdb;
pub mod reference;
pub mod synth;

pub use classifier::{classify, classify_batch, ClassifyError, FeatureMask, Neighbor, Prediction, ScanView};
pub use descriptors::{
    all_pairs_shortest_paths, compute_features, eigen_spectrum, DescriptorError, FeatureVector,
    PathSummary, Spectrum, ATTRIBUTE_NAMES, NUM_ATTRIBUTES,
};
pub use eval::{
    loo_accuracy, rfe, score_attributes, sweep_k, sweep_measures, AttributeScore, EvalError,
    LooResult, RfeResult,
};
pub use exec::Exec;
pub use graph::{build_graph, graph_stats, GraphBuildParams, GraphError, GraphStats, ProteinGraph};
pub use manifest::{load_manifest, ManifestEntry, ManifestError};
pub use metrics::{DistanceMeasure, MeasureKind, MetricError};
pub use pdb::{parse_pdb_file, parse_pdb_str, IngestError, IngestOptions, Residue, StructureRecord};
pub use reference::{
    build_db, featurize_file, normalize, BuildFailure, BuildReport, FeatureStats, ReferenceDb,
    StoreError,
};
