//! Reference clustering methods and scoring: K-means (with AIC selection of
//! `K`), DBSCAN, and the silhouette coefficient.

mod dbscan;
mod kmeans;
mod silhouette;

pub use dbscan::{dbscan, distance_quantile};
pub use kmeans::{aic, kmeans, kmeans_aic, lloyd, AicSelection, LloydRun};
pub use silhouette::{silhouette, silhouette_with, PairwiseDistances};

use serde::{Deserialize, Serialize};

use crate::Vector;

/// Outcome of a baseline clustering run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub k_found: usize,
    /// `None` marks noise (DBSCAN only).
    pub assignments: Vec<Option<usize>>,
    pub centroids: Vec<Vector>,
    /// Within-cluster sum of squared distances, noise excluded.
    pub inertia: f64,
    /// Index of the winning replicate (0 for single-run methods).
    pub replicate_used: usize,
}

/// Percentage of trials whose estimated `K` equals the truth; `NaN` for no trials.
pub fn correct_k_rate(found: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(found.len(), truth.len(), "one true K per trial");
    if found.is_empty() {
        return f64::NAN;
    }
    let hits = found.iter().zip(truth).filter(|(a, b)| a == b).count();
    100.0 * hits as f64 / found.len() as f64
}

pub(crate) fn inertia_of(
    data: &[Vector],
    assignments: &[Option<usize>],
    centroids: &[Vector],
) -> f64 {
    data.iter()
        .zip(assignments)
        .filter_map(|(z, a)| a.map(|k| (z - &centroids[k]).norm_squared()))
        .sum()
}
