//! Leave-one-out evaluation, parameter sweeps, recursive feature elimination
//! and attribute scoring.
//!
//! Every leave-one-out fold recomputes the normalization statistics (and the
//! std-euclidean variances) without the held-out row.

use thiserror::Error;

use crate::classifier::{ClassifyError, FeatureMask, ScanView};
use crate::descriptors::{ATTRIBUTE_NAMES, NUM_ATTRIBUTES};
use crate::exec::Exec;
use crate::metrics::DistanceMeasure;
use crate::reference::ReferenceDb;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("leave-one-out needs at least 2 rows, database `{name}` has {rows}")]
    TooFewRows { name: String, rows: usize },
    #[error("score_attributes needs at least one dataset, measure and k")]
    EmptyGrid,
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LooOutcome {
    pub query_id: String,
    pub true_class: String,
    pub predicted_class: String,
}

impl LooOutcome {
    pub fn correct(&self) -> bool {
        self.true_class == self.predicted_class
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LooResult {
    pub dataset_id: String,
    pub accuracy: f64,
    pub correct: usize,
    pub per_query: Vec<LooOutcome>,
    pub k: usize,
    pub measure: String,
    pub mask: FeatureMask,
}

impl LooResult {
    pub fn total(&self) -> usize {
        self.per_query.len()
    }
}

/// Leave-one-out accuracy: each row is classified against all other rows.
pub fn loo_accuracy(
    db: &ReferenceDb,
    k: usize,
    measure: &DistanceMeasure,
    mask: Option<&FeatureMask>,
    exec: Exec,
) -> Result<LooResult, EvalError> {
    if db.len() < 2 {
        return Err(EvalError::TooFewRows {
            name: db.name().to_string(),
            rows: db.len(),
        });
    }
    if k == 0 {
        return Err(ClassifyError::InvalidK.into());
    }
    let mask = mask.cloned().unwrap_or_else(FeatureMask::all);
    let outcomes = exec.map_range(db.len(), |i| -> Result<LooOutcome, ClassifyError> {
        let view = ScanView::excluding(db, i, mask.clone())?;
        let prediction = view.classify(db.row(i), k, measure)?;
        Ok(LooOutcome {
            query_id: db.row(i).structure_id.clone(),
            true_class: db.label(i).to_string(),
            predicted_class: prediction.predicted_class,
        })
    });
    let per_query = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let correct = per_query.iter().filter(|o| o.correct()).count();
    Ok(LooResult {
        dataset_id: db.name().to_string(),
        accuracy: correct as f64 / per_query.len() as f64,
        correct,
        per_query,
        k,
        measure: measure.to_string(),
        mask,
    })
}

/// One leave-one-out run per measure, in the given order.
pub fn sweep_measures(
    db: &ReferenceDb,
    k: usize,
    measures: &[DistanceMeasure],
    mask: Option<&FeatureMask>,
    exec: Exec,
) -> Result<Vec<LooResult>, EvalError> {
    measures.iter().map(|m| loo_accuracy(db, k, m, mask, exec)).collect()
}

/// One leave-one-out run per `k`, in the given order.
pub fn sweep_k(
    db: &ReferenceDb,
    measure: &DistanceMeasure,
    ks: &[usize],
    mask: Option<&FeatureMask>,
    exec: Exec,
) -> Result<Vec<LooResult>, EvalError> {
    ks.iter().map(|&k| loo_accuracy(db, k, measure, mask, exec)).collect()
}

/// Indices of `results` ordered by decreasing accuracy (stable).
pub fn rank_by_accuracy(results: &[LooResult]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| results[b].accuracy.total_cmp(&results[a].accuracy));
    order
}

/// Population standard deviation of the accuracies.
pub fn accuracy_std_dev(results: &[LooResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    let n = results.len() as f64;
    let mean = results.iter().map(|r| r.accuracy).sum::<f64>() / n;
    (results.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / n).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RfeStep {
    pub removed_attribute: usize,
    pub accuracy_after_removal: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RfeResult {
    pub initial_accuracy: f64,
    pub selected_mask: FeatureMask,
    pub elimination_trace: Vec<RfeStep>,
    pub final_accuracy: f64,
    /// Number of candidate masks evaluated at each step.
    pub candidates_per_step: Vec<usize>,
}

/// Greedy backward elimination.
///
/// Each round evaluates the leave-one-out accuracy of dropping every
/// remaining attribute and drops the best one, but only if it strictly beats
/// the current accuracy. Equal candidates go to the lowest attribute index.
/// Stops on no strict improvement or when a single attribute remains.
pub fn rfe(db: &ReferenceDb, k: usize, measure: &DistanceMeasure, exec: Exec) -> Result<RfeResult, EvalError> {
    let mut mask = FeatureMask::all();
    let initial_accuracy = loo_accuracy(db, k, measure, Some(&mask), Exec::Sequential)?.accuracy;
    let mut current = initial_accuracy;
    let mut trace = Vec::new();
    let mut candidates_per_step = Vec::new();

    while mask.len() > 1 {
        let candidates: Vec<(usize, FeatureMask)> = mask
            .indices()
            .iter()
            .filter_map(|&a| mask.without(a).map(|m| (a, m)))
            .collect();
        candidates_per_step.push(candidates.len());
        let scores = exec.map(&candidates, |(_, m)| {
            loo_accuracy(db, k, measure, Some(m), Exec::Sequential).map(|r| r.accuracy)
        });
        let mut best: Option<(usize, f64)> = None;
        for (i, score) in scores.into_iter().enumerate() {
            let score = score?;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        let Some((i, score)) = best else { break };
        if score <= current {
            break;
        }
        let (attribute, next) = candidates.into_iter().nth(i).expect("index from enumerate");
        trace.push(RfeStep {
            removed_attribute: attribute,
            accuracy_after_removal: score,
        });
        mask = next;
        current = score;
    }

    Ok(RfeResult {
        initial_accuracy,
        selected_mask: mask,
        elimination_trace: trace,
        final_accuracy: current,
        candidates_per_step,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeScore {
    pub experiments: usize,
    /// Times each attribute survived in an optimal subset.
    pub counts: [usize; NUM_ATTRIBUTES],
    pub scores: [f64; NUM_ATTRIBUTES],
    /// 1-based rank by decreasing score; ties keep attribute order.
    pub ranks: [usize; NUM_ATTRIBUTES],
}

impl AttributeScore {
    /// Attribute indices ordered from rank 1 downwards.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..NUM_ATTRIBUTES).collect();
        order.sort_by_key(|&a| self.ranks[a]);
        order
    }

    pub fn top(&self, n: usize) -> Vec<&'static str> {
        self.ranking().into_iter().take(n).map(|a| ATTRIBUTE_NAMES[a]).collect()
    }
}

/// Runs RFE for every `(dataset, measure, k)` cell and scores each attribute
/// by the fraction of cells whose optimal subset kept it.
pub fn score_attributes(
    datasets: &[ReferenceDb],
    measures: &[DistanceMeasure],
    ks: &[usize],
    exec: Exec,
) -> Result<AttributeScore, EvalError> {
    if datasets.is_empty() || measures.is_empty() || ks.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let mut cells = Vec::new();
    for db in datasets {
        for m in measures {
            for &k in ks {
                cells.push((db, m, k));
            }
        }
    }
    let results = exec.map(&cells, |&(db, m, k)| rfe(db, k, m, Exec::Sequential));
    let mut counts = [0usize; NUM_ATTRIBUTES];
    for result in results {
        for &a in result?.selected_mask.indices() {
            counts[a] += 1;
        }
    }
    Ok(score_counts(counts, cells.len()))
}

/// Scores and ranks from raw survival counts.
pub fn score_counts(counts: [usize; NUM_ATTRIBUTES], experiments: usize) -> AttributeScore {
    let scores = counts.map(|c| c as f64 / experiments as f64);
    let mut order: Vec<usize> = (0..NUM_ATTRIBUTES).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = [0usize; NUM_ATTRIBUTES];
    for (rank, &a) in order.iter().enumerate() {
        ranks[a] = rank + 1;
    }
    AttributeScore {
        experiments,
        counts,
        scores,
        ranks,
    }
}
