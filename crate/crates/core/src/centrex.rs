//! Centralized clustering: fixed-point centroid estimation with marking,
//! fusion of duplicate estimates, and nearest-centroid classification.
//!
//! All test matrices are multiples of `AΣAᵀ`, so the algorithm runs on the
//! whitened data `Ψ Z` where every Mahalanobis norm becomes a scaled
//! Euclidean norm. Centroids are mapped back with `Ψ⁻¹` on output. The fixed
//! point map commutes with the whitening (`Ψ h_C(φ) = h_{ΨCΨᵀ}(Ψφ)`), so
//! the two routes agree up to rounding.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::mathcore::{compute_r_squared, scalar_weight, CompressionModel, RSquared, WaldContext};
use crate::seed::{self, purpose};
use crate::wald::{fusion_merges, fusion_scale, wald_accepts_h1, Thresholds};
use crate::{Matrix, Vector};

/// An estimated compressed centroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidEstimate {
    pub phi_hat: Vector,
    /// Estimated cluster size `N̂`.
    pub n_hat: usize,
    /// Fixed-point steps used to produce the estimate.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub centroids: Vec<CentroidEstimate>,
    /// Cluster index per datum; `None` only for gated local classification.
    pub assignments: Vec<Option<usize>>,
    pub k_found: usize,
    /// Number of centroid estimations performed before fusion.
    pub estimation_passes: usize,
}

/// Algorithm parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CentrexParams {
    /// False-alarm level of the tests, in `(0, 1e-2]`.
    pub alpha: f64,
    /// Stopping tolerance of the fixed-point recursion, in `[1e-5, 1e-2]`.
    pub epsilon: f64,
    pub max_fp_iters: usize,
    pub r2_samples: usize,
    pub r2_seed: u64,
}

impl Default for CentrexParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            epsilon: 1e-3,
            max_fp_iters: 100,
            r2_samples: crate::mathcore::DEFAULT_MC_SAMPLES,
            r2_seed: 0x5EED_0002,
        }
    }
}

impl CentrexParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1e-2) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1e-2], got {}",
                self.alpha
            )));
        }
        if !(1e-5..=1e-2).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in [1e-5, 1e-2], got {}",
                self.epsilon
            )));
        }
        if self.max_fp_iters == 0 {
            return Err(Error::InvalidArgument(
                "max_fp_iters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `r²` for `μ² = 1`, the pairing used with the `AΣAᵀ` weight function.
    pub fn r_squared(&self, m: usize) -> Result<RSquared> {
        compute_r_squared(m, 1.0, self.r2_samples, self.r2_seed)
    }
}

// ---------------------------------------------------------------------------
// whitened kernels

#[inline]
fn dist2(col: nalgebra::DVectorView<'_, f64>, u: &Vector) -> f64 {
    col.iter()
        .zip(u.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Weighted sums `(Σ w_n y_n, Σ w_n)` with `w_n = w(‖y_n − u‖² / scale)`.
pub(crate) fn weighted_sums(y: &Matrix, u: &Vector, scale: f64) -> (Vector, f64) {
    let m = y.nrows();
    let mut p = Vector::zeros(m);
    let mut q = 0.0;
    for col in y.column_iter() {
        let w = scalar_weight(m, dist2(col, u) / scale);
        if w > 0.0 {
            p.axpy(w, &col, 1.0);
            q += w;
        }
    }
    (p, q)
}

/// One application of the fixed-point map; `None` when every weight
/// underflows.
pub(crate) fn h_step(y: &Matrix, u: &Vector, scale: f64) -> Option<Vector> {
    let (p, q) = weighted_sums(y, u, scale);
    (q > 0.0).then(|| p / q)
}

pub(crate) struct Estimate {
    pub u: Vector,
    pub n_hat: usize,
    pub iterations: usize,
    pub newly_marked: Vec<usize>,
}

/// Estimate one centroid from a random unmarked datum and mark its members.
///
/// `full` runs the recursion to convergence; otherwise only the first step
/// (with the `2AΣAᵀ` weight) is taken.
pub(crate) fn estimate_whitened<R: Rng>(
    y: &Matrix,
    marked: &[bool],
    params: &CentrexParams,
    th: &Thresholds,
    full: bool,
    rng: &mut R,
) -> Result<Estimate> {
    let unmarked: Vec<usize> = (0..marked.len()).filter(|&i| !marked[i]).collect();
    if unmarked.is_empty() {
        return Err(Error::Precondition("every datum is already marked".into()));
    }
    let m = y.nrows();
    let star = unmarked[rng.random_range(0..unmarked.len())];
    let start: Vector = y.column(star).into_owned();

    let mut u = h_step(y, &start, 2.0).unwrap_or_else(|| start.clone());
    let mut iterations = 1;
    let mut converged = (&u - &start).norm() / m as f64 <= params.epsilon;
    if full {
        while !converged && iterations < params.max_fp_iters {
            let Some(next) = h_step(y, &u, 1.0) else {
                break;
            };
            iterations += 1;
            converged = (&next - &u).norm() / m as f64 <= params.epsilon;
            u = next;
        }
        if !converged && iterations >= params.max_fp_iters {
            warn!(
                "fixed-point recursion hit the {} iteration cap; using last iterate",
                params.max_fp_iters
            );
        }
    }

    let mut n_hat = 0;
    let mut newly_marked = Vec::new();
    for (i, col) in y.column_iter().enumerate() {
        let member = i == star || !wald_accepts_h1(dist2(col, &u).sqrt(), th);
        if member {
            n_hat += 1;
            if !marked[i] {
                newly_marked.push(i);
            }
        }
    }
    Ok(Estimate {
        u,
        n_hat,
        iterations,
        newly_marked,
    })
}

/// Repeated pairwise sweep: merge `j` into `i` (`i < j`) whenever `merges`
/// says so, until a full sweep makes no change.
pub(crate) fn fuse_by<T>(
    mut items: Vec<T>,
    mut merges: impl FnMut(&T, &T) -> bool,
    mut merge: impl FnMut(&mut T, T),
) -> Vec<T> {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < items.len() {
            let mut j = i + 1;
            while j < items.len() {
                if merges(&items[i], &items[j]) {
                    let gone = items.remove(j);
                    merge(&mut items[i], gone);
                    changed = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !changed {
            return items;
        }
    }
}

/// Nearest whitened centroid per datum; ties go to the lowest index.
pub(crate) fn nearest(y: &Matrix, us: &[Vector]) -> Vec<(usize, f64)> {
    y.column_iter()
        .map(|col| {
            let mut best = (0, f64::INFINITY);
            for (k, u) in us.iter().enumerate() {
                let d = dist2(col, u);
                if d < best.1 {
                    best = (k, d);
                }
            }
            (best.0, best.1.sqrt())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// public operations

/// The fixed-point map `h_C(φ) = Σ w_C(Z_n − φ) Z_n / Σ w_C(Z_n − φ)`.
pub fn h_map(ctx: &WaldContext, data: &[Vector], phi: &Vector) -> Result<Vector> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "h_C needs at least one datum".into(),
        ));
    }
    check_dim(ctx.dim(), phi.len())?;
    let mut num = Vector::zeros(ctx.dim());
    let mut den = 0.0;
    for z in data {
        let w = ctx.weight(&(z - phi))?;
        num.axpy(w, z, 1.0);
        den += w;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::Precondition(
            "every weight underflowed to zero".into(),
        ))
    }
}

/// Estimate one centroid starting from a uniformly drawn unmarked datum.
///
/// The first step uses `C = 2AΣAᵀ`, later steps `C = AΣAᵀ`; the recursion
/// stops when `ν_C(φ⁽ˡ⁺¹⁾ − φ⁽ˡ⁾)/m ≤ ε`. The starting datum and every datum
/// accepted by test 2 against the new centroid are marked. `N̂` counts that
/// set. Returns the estimate and the indices that were not marked before.
pub fn estimate_one_centroid<R: Rng>(
    model: &CompressionModel,
    data: &[Vector],
    marked: &[bool],
    params: &CentrexParams,
    rng: &mut R,
) -> Result<(CentroidEstimate, Vec<usize>)> {
    check_dim(data.len(), marked.len())?;
    let y = model.whiten_all(data)?;
    let th = Thresholds::new(model.m(), params.alpha)?;
    let e = estimate_whitened(&y, marked, params, &th, true, rng)?;
    Ok((
        CentroidEstimate {
            phi_hat: model.unwhiten_vector(&e.u),
            n_hat: e.n_hat,
            iterations: e.iterations,
        },
        e.newly_marked,
    ))
}

/// Fusion of duplicate estimates with test 4.
///
/// Every pair `(i, j)`, `i < j`, is tested in index order; on a merge the
/// lower index takes the midpoint, `N̂` values add up, and `j` is removed.
/// Sweeps repeat until nothing merges.
pub fn fuse(
    centroids: &[CentroidEstimate],
    model: &CompressionModel,
    mu2: f64,
    r2: &RSquared,
    alpha: f64,
) -> Result<Vec<CentroidEstimate>> {
    let th = Thresholds::new(model.m(), alpha)?;
    let mut whitened = Vec::with_capacity(centroids.len());
    for c in centroids {
        if c.n_hat == 0 {
            return Err(Error::InvalidArgument(
                "cluster size estimate is zero".into(),
            ));
        }
        whitened.push((model.whiten_vector(&c.phi_hat)?, c));
    }
    let fused = fuse_by(
        whitened
            .into_iter()
            .map(|(u, c)| (u, c.n_hat, c.iterations))
            .collect(),
        |a, b| {
            let scale = fusion_scale(a.1, b.1, mu2, r2.value).expect("sizes checked");
            fusion_merges((&a.0 - &b.0).norm() / scale.sqrt(), &th)
        },
        |a, b| {
            a.0 = (&a.0 + &b.0) * 0.5;
            a.1 += b.1;
        },
    );
    Ok(fused
        .into_iter()
        .map(|(u, n_hat, iterations)| CentroidEstimate {
            phi_hat: model.unwhiten_vector(&u),
            n_hat,
            iterations,
        })
        .collect())
}

/// Assign every datum to the centroid nearest in `ν_{AΣAᵀ}`.
pub fn classify(
    model: &CompressionModel,
    data: &[Vector],
    centroids: &[CentroidEstimate],
) -> Result<Vec<usize>> {
    if centroids.is_empty() {
        return Err(Error::InvalidArgument(
            "no centroids to classify against".into(),
        ));
    }
    let y = model.whiten_all(data)?;
    let us = centroids
        .iter()
        .map(|c| model.whiten_vector(&c.phi_hat))
        .collect::<Result<Vec<_>>>()?;
    Ok(nearest(&y, &us).into_iter().map(|(k, _)| k).collect())
}

/// The full centralized algorithm: estimate centroids until every datum is
/// marked, fuse, classify, and refresh `N̂` from the final assignment.
pub fn centrex_run(
    model: &CompressionModel,
    data: &[Vector],
    params: &CentrexParams,
    r2: &RSquared,
    seed_: u64,
) -> Result<ClusteringResult> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("no data to cluster".into()));
    }
    let y = model.whiten_all(data)?;
    let th = Thresholds::new(model.m(), params.alpha)?;
    let mut rng = seed::stream(seed_, &[purpose::CENTREX]);

    let mut marked = vec![false; data.len()];
    let mut remaining = data.len();
    let mut estimates = Vec::new();
    while remaining > 0 {
        let e = estimate_whitened(&y, &marked, params, &th, true, &mut rng)?;
        for &i in &e.newly_marked {
            marked[i] = true;
        }
        remaining -= e.newly_marked.len();
        estimates.push((e.u, e.n_hat, e.iterations));
    }
    let passes = estimates.len();

    let fused = fuse_by(
        estimates,
        |a, b| {
            let scale = fusion_scale(a.1, b.1, 1.0, r2.value).expect("marking counts ≥ 1");
            fusion_merges((&a.0 - &b.0).norm() / scale.sqrt(), &th)
        },
        |a, b| {
            a.0 = (&a.0 + &b.0) * 0.5;
            a.1 += b.1;
        },
    );

    let us: Vec<Vector> = fused.iter().map(|c| c.0.clone()).collect();
    let labels = nearest(&y, &us);
    let mut counts = vec![0usize; us.len()];
    for &(k, _) in &labels {
        counts[k] += 1;
    }
    let centroids = fused
        .into_iter()
        .zip(counts)
        .map(|((u, _, iterations), n)| CentroidEstimate {
            phi_hat: model.unwhiten_vector(&u),
            n_hat: n,
            iterations,
        })
        .collect::<Vec<_>>();
    Ok(ClusteringResult {
        k_found: centroids.len(),
        centroids,
        assignments: labels.into_iter().map(|(k, _)| Some(k)).collect(),
        estimation_passes: passes,
    })
}
