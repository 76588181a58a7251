//! The four hypothesis tests used by the clustering algorithms.
//!
//! Tests 1–3 are Wald tests of a zero mean: they accept `H1` when the
//! Mahalanobis norm of a difference vector exceeds `λ_α` and accept `H0` on
//! equality. Test 4 reverses the null (`H0`: the two centroids differ) and
//! accepts `H1` (merge) when the statistic is at most `λ_{1−α}`.
//!
//! Test 4 treats the two estimates as independent under `H0`. This is an
//! approximation: estimates computed from overlapping data are correlated.
//!
//! All four covariance matrices are multiples of `AΣAᵀ`, so every statistic
//! is `‖Ψ (x − y)‖ / √scale` with the whitening `Ψ` of `AΣAᵀ`.

use serde::{Deserialize, Serialize};

use crate::centrex::CentroidEstimate;
use crate::error::{check_dim, Error, Result};
use crate::mathcore::{invert_threshold, marcum_q_half_m, CompressionModel, RSquared};
use crate::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Outcome of one test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub accepted: Hypothesis,
    /// `ν_C` of the difference vector.
    pub statistic: f64,
    pub threshold: f64,
    /// `Q_{m/2}(0, statistic)` for tests 1–3; `None` for the fusion test.
    pub pvalue: Option<f64>,
}

impl TestDecision {
    fn wald(m: usize, statistic: f64, threshold: f64) -> Self {
        let accepted = if statistic > threshold {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        };
        Self {
            accepted,
            statistic,
            threshold,
            pvalue: Some(marcum_q_half_m(m, statistic)),
        }
    }

    fn fusion(statistic: f64, threshold: f64) -> Self {
        let accepted = if statistic <= threshold {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        };
        Self {
            accepted,
            statistic,
            threshold,
            pvalue: None,
        }
    }

    pub fn rejects_null(&self) -> bool {
        self.accepted == Hypothesis::H1
    }
}

/// Thresholds for one level `α`: `λ_α` for tests 1–3 and `λ_{1−α}` for the
/// fusion test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub m: usize,
    pub alpha: f64,
    pub wald: f64,
    pub fusion: f64,
}

impl Thresholds {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        Ok(Self {
            m,
            alpha,
            wald: invert_threshold(m, alpha)?,
            fusion: invert_threshold(m, 1.0 - alpha)?,
        })
    }
}

/// Covariance scale of test 3: `1 + r² / (μ² N̂)`.
pub fn membership_scale(n_hat: usize, mu2: f64, r2: f64) -> Result<f64> {
    if n_hat == 0 {
        return Err(Error::InvalidArgument(
            "cluster size estimate is zero".into(),
        ));
    }
    Ok(1.0 + r2 / (mu2 * n_hat as f64))
}

/// Covariance scale of test 4: `(1/N̂ + 1/N̂′) r² / μ²`.
pub fn fusion_scale(n_a: usize, n_b: usize, mu2: f64, r2: f64) -> Result<f64> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidArgument(
            "cluster size estimate is zero".into(),
        ));
    }
    Ok((1.0 / n_a as f64 + 1.0 / n_b as f64) * r2 / mu2)
}

/// The four tests bound to one compression model and one level.
///
/// Thresholds are inverted once at construction.
#[derive(Clone, Debug)]
pub struct WaldTests {
    psi: Matrix,
    thresholds: Thresholds,
}

impl WaldTests {
    pub fn new(model: &CompressionModel, alpha: f64) -> Result<Self> {
        Ok(Self {
            psi: model.whitening().clone(),
            thresholds: Thresholds::new(model.m(), alpha)?,
        })
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    fn whitened_norm(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim(self.thresholds.m, x.len())?;
        check_dim(self.thresholds.m, y.len())?;
        Ok((&self.psi * (x - y)).norm())
    }

    /// Test 1: do `z_i` and `z_j` share a cluster? `C = 2AΣAᵀ`.
    pub fn same_cluster(&self, zi: &Vector, zj: &Vector) -> Result<TestDecision> {
        let stat = self.whitened_norm(zi, zj)? / 2f64.sqrt();
        Ok(TestDecision::wald(
            self.thresholds.m,
            stat,
            self.thresholds.wald,
        ))
    }

    /// Test 2: does `z` belong to the cluster with known centroid `phi`?
    /// `C = AΣAᵀ`.
    pub fn membership(&self, z: &Vector, phi: &Vector) -> Result<TestDecision> {
        let stat = self.whitened_norm(z, phi)?;
        Ok(TestDecision::wald(
            self.thresholds.m,
            stat,
            self.thresholds.wald,
        ))
    }

    /// Test 3: membership against an estimated centroid,
    /// `C = (1 + r²/(μ² N̂)) AΣAᵀ`.
    pub fn membership_estimated(
        &self,
        z: &Vector,
        phi_hat: &CentroidEstimate,
        mu2: f64,
        r2: &RSquared,
    ) -> Result<TestDecision> {
        let scale = membership_scale(phi_hat.n_hat, mu2, r2.value)?;
        let stat = self.whitened_norm(z, &phi_hat.phi_hat)? / scale.sqrt();
        Ok(TestDecision::wald(
            self.thresholds.m,
            stat,
            self.thresholds.wald,
        ))
    }

    /// Test 4: are two estimates of the same centroid? `H1` means merge.
    pub fn fusion(
        &self,
        a: &CentroidEstimate,
        b: &CentroidEstimate,
        mu2: f64,
        r2: &RSquared,
    ) -> Result<TestDecision> {
        let scale = fusion_scale(a.n_hat, b.n_hat, mu2, r2.value)?;
        let stat = self.whitened_norm(&a.phi_hat, &b.phi_hat)? / scale.sqrt();
        Ok(TestDecision::fusion(stat, self.thresholds.fusion))
    }
}

/// Decision of a Wald test from a precomputed statistic.
pub(crate) fn wald_accepts_h1(statistic: f64, thresholds: &Thresholds) -> bool {
    statistic > thresholds.wald
}

/// Decision of the fusion test from a precomputed statistic.
pub(crate) fn fusion_merges(statistic: f64, thresholds: &Thresholds) -> bool {
    statistic <= thresholds.fusion
}

pub fn test1_same_cluster(
    model: &CompressionModel,
    zi: &Vector,
    zj: &Vector,
    alpha: f64,
) -> Result<TestDecision> {
    WaldTests::new(model, alpha)?.same_cluster(zi, zj)
}

pub fn test2_membership(
    model: &CompressionModel,
    z: &Vector,
    phi_k: &Vector,
    alpha: f64,
) -> Result<TestDecision> {
    WaldTests::new(model, alpha)?.membership(z, phi_k)
}

pub fn test3_membership_estimated(
    model: &CompressionModel,
    z: &Vector,
    phi_hat: &CentroidEstimate,
    mu2: f64,
    r2: &RSquared,
    alpha: f64,
) -> Result<TestDecision> {
    WaldTests::new(model, alpha)?.membership_estimated(z, phi_hat, mu2, r2)
}

pub fn test4_fusion(
    a: &CentroidEstimate,
    b: &CentroidEstimate,
    model: &CompressionModel,
    mu2: f64,
    r2: &RSquared,
    alpha: f64,
) -> Result<TestDecision> {
    WaldTests::new(model, alpha)?.fusion(a, b, mu2, r2)
}
