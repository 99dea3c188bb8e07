use std::path::PathBuf;

use rand_distr::{Distribution, Normal};
use resgraph::synth;
use resgraph::{FeatureVector, GraphBuildParams, ManifestEntry, ReferenceDb, NUM_ATTRIBUTES};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The six labeled fixture structures: three helices and three strands.
pub fn fixture_manifest() -> Vec<ManifestEntry> {
    resgraph::load_manifest(fixture("manifest.csv")).expect("fixture manifest")
}

/// Two Gaussian clusters of 10 rows each. Class `a` is high on the first
/// half of the attributes and low on the second; class `b` the reverse.
/// Spread is 0.1 against a gap of 9 between the cluster means.
pub fn separable_clusters(seed: u64) -> ReferenceDb {
    let mut rng = synth::rng(seed);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut rows = Vec::new();
    for (class, high_first) in [("a", true), ("b", false)] {
        for i in 0..10 {
            let values: [f64; NUM_ATTRIBUTES] = std::array::from_fn(|j| {
                let high = (j < NUM_ATTRIBUTES / 2) == high_first;
                (if high { 10.0 } else { 1.0 }) + noise.sample(&mut rng)
            });
            rows.push(FeatureVector::new(format!("{class}{i:02}"), Some(class.to_string()), values));
        }
    }
    ReferenceDb::from_rows(rows, GraphBuildParams::default()).unwrap()
}

/// Index of the attribute carrying adversarial noise in [`noise_fixture`].
pub const NOISE_ATTRIBUTE: usize = NUM_ATTRIBUTES - 1;

/// Two classes separated along attribute 0 (`a` at 0.0..0.9, `b` at
/// 2.0..2.9). The last attribute is 1 only for the two rows closest to the
/// class boundary, pulling each towards the other class and flipping both
/// leave-one-out outcomes under euclidean distance. All other attributes are
/// constant.
pub fn noise_fixture() -> ReferenceDb {
    let mut rows = Vec::new();
    for (class, base) in [("a", 0.0), ("b", 2.0)] {
        for i in 0..10 {
            let mut values = [1.0; NUM_ATTRIBUTES];
            values[0] = base + 0.1 * i as f64;
            let boundary = (class == "a" && i == 9) || (class == "b" && i == 0);
            values[NOISE_ATTRIBUTE] = if boundary { 1.0 } else { 0.0 };
            rows.push(FeatureVector::new(format!("{class}{i}"), Some(class.to_string()), values));
        }
    }
    ReferenceDb::from_rows(rows, GraphBuildParams::default()).unwrap()
}
