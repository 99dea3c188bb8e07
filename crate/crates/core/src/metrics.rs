//! Pairwise dissimilarities between attribute vectors.
//!
//! All nine measures are total functions on finite input:
//! - `std-euclidean` skips attributes whose variance is zero;
//! - `cosine` is 1 when exactly one vector has zero norm, 0 when both do;
//! - `correlation` is 1 when exactly one vector has zero variance, 0 when both do;
//! - `canberra` terms with a zero denominator contribute 0;
//! - `braycurtis` is 0 when its denominator is 0.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("unknown distance measure `{0}`")]
    UnknownMeasure(String),
    #[error("minkowski order must be finite and >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("std-euclidean needs per-attribute variances")]
    MissingVariances,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    Euclidean,
    StdEuclidean,
    Cosine,
    Manhattan,
    Correlation,
    Minkowski,
    Chebyshev,
    Canberra,
    BrayCurtis,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 9] = [
        MeasureKind::Euclidean,
        MeasureKind::StdEuclidean,
        MeasureKind::Cosine,
        MeasureKind::Manhattan,
        MeasureKind::Correlation,
        MeasureKind::Minkowski,
        MeasureKind::Chebyshev,
        MeasureKind::Canberra,
        MeasureKind::BrayCurtis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Euclidean => "euclidean",
            MeasureKind::StdEuclidean => "std-euclidean",
            MeasureKind::Cosine => "cosine",
            MeasureKind::Manhattan => "manhattan",
            MeasureKind::Correlation => "correlation",
            MeasureKind::Minkowski => "minkowski",
            MeasureKind::Chebyshev => "chebyshev",
            MeasureKind::Canberra => "canberra",
            MeasureKind::BrayCurtis => "braycurtis",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .or(match key.as_str() {
                "seuclidean" | "standardized-euclidean" => Some(MeasureKind::StdEuclidean),
                "bray-curtis" => Some(MeasureKind::BrayCurtis),
                _ => None,
            })
            .ok_or_else(|| MetricError::UnknownMeasure(s.to_string()))
    }
}

/// A measure together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMeasure {
    pub kind: MeasureKind,
    minkowski_order: f64,
    variances: Option<Vec<f64>>,
}

impl DistanceMeasure {
    pub const DEFAULT_MINKOWSKI_ORDER: f64 = 2.0;

    pub fn new(kind: MeasureKind) -> Self {
        Self {
            kind,
            minkowski_order: Self::DEFAULT_MINKOWSKI_ORDER,
            variances: None,
        }
    }

    pub fn minkowski(p: f64) -> Result<Self, MetricError> {
        Self::new(MeasureKind::Minkowski).with_minkowski_order(p)
    }

    pub fn with_minkowski_order(mut self, p: f64) -> Result<Self, MetricError> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(MetricError::InvalidOrder(p));
        }
        self.minkowski_order = p;
        Ok(self)
    }

    pub fn with_variances(mut self, variances: Vec<f64>) -> Self {
        self.variances = Some(variances);
        self
    }

    pub fn minkowski_order(&self) -> f64 {
        self.minkowski_order
    }

    pub fn variances(&self) -> Option<&[f64]> {
        self.variances.as_deref()
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Checked evaluation.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
        if x.len() != y.len() {
            return Err(MetricError::DimensionMismatch(x.len(), y.len()));
        }
        let variances = match (self.kind, self.variances.as_deref()) {
            (MeasureKind::StdEuclidean, None) => return Err(MetricError::MissingVariances),
            (MeasureKind::StdEuclidean, Some(v)) if v.len() != x.len() => {
                return Err(MetricError::DimensionMismatch(x.len(), v.len()))
            }
            (_, v) => v.unwrap_or(&[]),
        };
        Ok(self.distance_unchecked(x, y, variances))
    }

    /// Unchecked evaluation used by the scan loop. `variances` is only read
    /// by `std-euclidean` and must then have the vectors' length.
    #[inline]
    pub fn distance_unchecked(&self, x: &[f64], y: &[f64], variances: &[f64]) -> f64 {
        match self.kind {
            MeasureKind::Euclidean => euclidean(x, y),
            MeasureKind::StdEuclidean => std_euclidean(x, y, variances),
            MeasureKind::Cosine => cosine(x, y),
            MeasureKind::Manhattan => manhattan(x, y),
            MeasureKind::Correlation => correlation(x, y),
            MeasureKind::Minkowski => minkowski(x, y, self.minkowski_order),
            MeasureKind::Chebyshev => chebyshev(x, y),
            MeasureKind::Canberra => canberra(x, y),
            MeasureKind::BrayCurtis => braycurtis(x, y),
        }
    }
}

impl fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == MeasureKind::Minkowski && self.minkowski_order != Self::DEFAULT_MINKOWSKI_ORDER {
            write!(f, "minkowski(p={})", self.minkowski_order)
        } else {
            f.write_str(self.name())
        }
    }
}

#[inline]
pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[inline]
pub fn std_euclidean(x: &[f64], y: &[f64], variances: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(variances)
        .filter(|(_, &v)| v > 0.0)
        .map(|((a, b), v)| (a - b) * (a - b) / v)
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn manhattan(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

#[inline]
pub fn chebyshev(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
}

#[inline]
pub fn minkowski(x: &[f64], y: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return manhattan(x, y);
    }
    if p == 2.0 {
        return euclidean(x, y);
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs().powf(p))
        .sum::<f64>()
        .powf(p.recip())
}

pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    match (nx == 0.0, ny == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - dot / (nx * ny).sqrt()).max(0.0),
    }
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    // Constant vectors have no variance even if the mean rounds.
    let flat_x = sxx == 0.0 || x.iter().all(|&a| a == x[0]);
    let flat_y = syy == 0.0 || y.iter().all(|&b| b == y[0]);
    match (flat_x, flat_y) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - sxy / (sxx * syy).sqrt()).max(0.0),
    }
}

#[inline]
pub fn canberra(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                (a - b).abs() / den
            }
        })
        .sum()
}

#[inline]
pub fn braycurtis(x: &[f64], y: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        num += (a - b).abs();
        den += (a + b).abs();
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
