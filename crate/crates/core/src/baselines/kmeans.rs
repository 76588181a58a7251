use rand::seq::index;

use super::{inertia_of, BaselineResult};
use crate::error::{Error, Result};
use crate::seed::{self, purpose};
use crate::Vector;

const MAX_ITERS: usize = 300;

/// A single Lloyd run from fixed initial centroids.
#[derive(Clone, Debug)]
pub struct LloydRun {
    pub centroids: Vec<Vector>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub history: Vec<f64>,
}

fn assign(data: &[Vector], centroids: &[Vector], labels: &mut [usize]) -> (f64, bool) {
    let mut total = 0.0;
    let mut changed = false;
    for (z, label) in data.iter().zip(labels.iter_mut()) {
        let (best, d2) = centroids
            .iter()
            .enumerate()
            .map(|(k, c)| (k, (z - c).norm_squared()))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        total += d2;
        if *label != best {
            *label = best;
            changed = true;
        }
    }
    (total, changed)
}

/// Lloyd iterations until the assignment stops changing. Empty clusters keep
/// their previous centroid.
pub fn lloyd(data: &[Vector], init: Vec<Vector>) -> LloydRun {
    let mut centroids = init;
    let mut labels = vec![usize::MAX; data.len()];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERS {
        let (inertia, changed) = assign(data, &centroids, &mut labels);
        history.push(inertia);
        if !changed {
            break;
        }
        let dim = centroids[0].len();
        let mut sums = vec![Vector::zeros(dim); centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (z, &l) in data.iter().zip(&labels) {
            sums[l] += z;
            counts[l] += 1;
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            if n > 0 {
                *c = s / n as f64;
            }
        }
    }
    let inertia = *history.last().unwrap_or(&0.0);
    LloydRun {
        centroids,
        labels,
        inertia,
        history,
    }
}

/// K-means with `replicates` random restarts (initial centroids are distinct
/// data points); the run with lowest inertia wins.
pub fn kmeans(data: &[Vector], k: usize, replicates: usize, seed_: u64) -> Result<BaselineResult> {
    if k == 0 || k > data.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            data.len()
        )));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let mut rng = seed::stream(seed_, &[purpose::KMEANS, k as u64]);
    let mut best: Option<(usize, LloydRun)> = None;
    for rep in 0..replicates {
        let init = index::sample(&mut rng, data.len(), k)
            .into_iter()
            .map(|i| data[i].clone())
            .collect();
        let run = lloyd(data, init);
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((rep, run));
        }
    }
    let (replicate_used, run) = best.expect("replicates > 0");
    let assignments: Vec<Option<usize>> = run.labels.iter().map(|&l| Some(l)).collect();
    Ok(BaselineResult {
        k_found: k,
        inertia: inertia_of(data, &assignments, &run.centroids),
        assignments,
        centroids: run.centroids,
        replicate_used,
    })
}

/// `N·m·ln(inertia / (N·m)) + 2·K·m`.
pub fn aic(n: usize, m: usize, inertia: f64, k: usize) -> f64 {
    let nm = (n * m) as f64;
    nm * (inertia / nm).ln() + 2.0 * (k * m) as f64
}

#[derive(Clone, Debug)]
pub struct AicSelection {
    pub best: BaselineResult,
    /// AIC for `K = 1, 2, …`.
    pub aic: Vec<f64>,
}

/// Run K-means for `K = 1..=k_max` and keep the AIC minimizer (smallest `K`
/// on ties).
pub fn kmeans_aic(
    data: &[Vector],
    k_max: usize,
    replicates: usize,
    seed_: u64,
) -> Result<AicSelection> {
    if data.is_empty() || k_max == 0 {
        return Err(Error::InvalidArgument("need data and k_max ≥ 1".into()));
    }
    let m = data[0].len();
    let mut scores = Vec::new();
    let mut best: Option<(f64, BaselineResult)> = None;
    for k in 1..=k_max.min(data.len()) {
        let res = kmeans(data, k, replicates, seed_)?;
        let score = aic(data.len(), m, res.inertia, k);
        scores.push(score);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, res));
        }
    }
    Ok(AicSelection {
        best: best.expect("k_max ≥ 1").1,
        aic: scores,
    })
}
