use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::special::{invert_threshold, marcum_q_half_m};
use crate::error::{check_dim, Error, Result};
use crate::{Matrix, Vector};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-12;

/// `Ψ` and `Ψ⁻¹` for an SPD matrix `C = R δ Rᵀ`.
struct Factors {
    psi: Matrix,
    psi_inv: Matrix,
}

fn factor(c: &Matrix) -> Result<Factors> {
    if !c.is_square() {
        return Err(Error::Dimension {
            expected: c.nrows(),
            got: c.ncols(),
        });
    }
    let scale = c.amax().max(1.0);
    let asymmetry = (c - c.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let eig = SymmetricEigen::new(c.clone());
    let largest = eig.eigenvalues.max();
    if let Some(&bad) = eig
        .eigenvalues
        .iter()
        .find(|&&l| l.is_nan() || l <= 0.0 || l <= EIGEN_FLOOR * largest)
    {
        return Err(Error::NotPositiveDefinite { eigenvalue: bad });
    }
    let n = c.nrows();
    let r = &eig.eigenvectors;
    let mut psi = Matrix::zeros(n, n);
    let mut psi_inv = Matrix::zeros(n, n);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.sqrt();
        psi.row_mut(i).copy_from(&(r.column(i).transpose() / s));
        psi_inv.column_mut(i).copy_from(&(r.column(i) * s));
    }
    Ok(Factors { psi, psi_inv })
}

/// Whitening matrix `Ψ = δ^{-1/2} Rᵀ` of an SPD matrix `C = R δ Rᵀ`, so that
/// `Ψ C Ψᵀ = I`.
///
/// Eigenvalues at or below `1e-12` times the largest one are rejected rather
/// than clamped.
pub fn whiten(c: &Matrix) -> Result<Matrix> {
    factor(c).map(|f| f.psi)
}

/// Sensing matrix `A`, noise covariance `Σ`, and the compressed covariance
/// `AΣAᵀ` with its whitening.
///
/// Every test matrix used by the algorithms is a positive multiple of
/// `AΣAᵀ`, so the single whitening computed here serves all of them:
/// the whitening of `s·AΣAᵀ` is `Ψ/√s`.
#[derive(Clone, Debug)]
pub struct CompressionModel {
    a: Matrix,
    sigma: Matrix,
    c_base: Matrix,
    psi: Matrix,
    psi_inv: Matrix,
}

impl CompressionModel {
    pub fn new(a: Matrix, sigma: Matrix) -> Result<Self> {
        let (m, d) = a.shape();
        if m == 0 || d == 0 {
            return Err(Error::InvalidArgument("empty sensing matrix".into()));
        }
        if m > d {
            return Err(Error::InvalidArgument(format!(
                "sensing matrix must not expand dimension (m = {m} > d = {d})"
            )));
        }
        check_dim(d, sigma.nrows())?;
        check_dim(d, sigma.ncols())?;
        factor(&sigma)?;

        let rank = a.rank(1e-10 * a.amax().max(f64::MIN_POSITIVE));
        if rank < m {
            return Err(Error::RankDeficient { rank, expected: m });
        }

        let c = &a * &sigma * a.transpose();
        let c_base = (&c + c.transpose()) * 0.5;
        let f = factor(&c_base)?;
        Ok(Self {
            a,
            sigma,
            c_base,
            psi: f.psi,
            psi_inv: f.psi_inv,
        })
    }

    /// Model with `Σ = σ² I_d`.
    pub fn isotropic(a: Matrix, noise_std: f64) -> Result<Self> {
        if noise_std.is_nan() || noise_std <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise standard deviation must be positive, got {noise_std}"
            )));
        }
        let d = a.ncols();
        Self::new(a, Matrix::identity(d, d) * (noise_std * noise_std))
    }

    pub fn sensing(&self) -> &Matrix {
        &self.a
    }

    pub fn noise_covariance(&self) -> &Matrix {
        &self.sigma
    }

    /// `AΣAᵀ`.
    pub fn covariance(&self) -> &Matrix {
        &self.c_base
    }

    /// Whitening matrix of `AΣAᵀ`.
    pub fn whitening(&self) -> &Matrix {
        &self.psi
    }

    /// Inverse of [`whitening`](Self::whitening).
    pub fn unwhitening(&self) -> &Matrix {
        &self.psi_inv
    }

    /// Compressed dimension `m`.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Original dimension `d`.
    pub fn d(&self) -> usize {
        self.a.ncols()
    }

    pub fn whiten_vector(&self, z: &Vector) -> Result<Vector> {
        check_dim(self.m(), z.len())?;
        Ok(&self.psi * z)
    }

    pub fn unwhiten_vector(&self, u: &Vector) -> Vector {
        &self.psi_inv * u
    }

    /// Whitened data as an `m × N` matrix, one datum per column.
    pub fn whiten_all(&self, data: &[Vector]) -> Result<Matrix> {
        let m = self.m();
        let mut z = Matrix::zeros(m, data.len());
        for (j, v) in data.iter().enumerate() {
            check_dim(m, v.len())?;
            z.column_mut(j).copy_from(v);
        }
        Ok(&self.psi * z)
    }

    /// Wald context for `C = scale · AΣAᵀ` at level `alpha`.
    pub fn context(&self, scale: f64, alpha: f64) -> Result<WaldContext> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "covariance scale must be positive, got {scale}"
            )));
        }
        let m = self.m();
        Ok(WaldContext {
            c: &self.c_base * scale,
            psi: &self.psi / scale.sqrt(),
            m,
            alpha,
            lambda_alpha: invert_threshold(m, alpha)?,
        })
    }
}

/// A positive-definite matrix `C` with its whitening, a test level `α` and
/// the Wald threshold `λ_α`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaldContext {
    c: Matrix,
    psi: Matrix,
    m: usize,
    alpha: f64,
    lambda_alpha: f64,
}

impl WaldContext {
    pub fn new(c: Matrix, alpha: f64) -> Result<Self> {
        let psi = whiten(&c)?;
        let m = c.nrows();
        let lambda_alpha = invert_threshold(m, alpha)?;
        Ok(Self {
            c,
            psi,
            m,
            alpha,
            lambda_alpha,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.c
    }

    pub fn whitening(&self) -> &Matrix {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn threshold(&self) -> f64 {
        self.lambda_alpha
    }

    /// `ν_C(x) = ‖Ψx‖`.
    pub fn mahalanobis(&self, x: &Vector) -> Result<f64> {
        check_dim(self.m, x.len())?;
        Ok((&self.psi * x).norm())
    }

    /// `w_C(x) = Q_{m/2}(0, ν_C(x))`.
    pub fn weight(&self, x: &Vector) -> Result<f64> {
        Ok(marcum_q_half_m(self.m, self.mahalanobis(x)?))
    }
}

/// Mahalanobis norm `ν_C(x) = sqrt(xᵀ C⁻¹ x)`.
pub fn mahalanobis(ctx: &WaldContext, x: &Vector) -> Result<f64> {
    ctx.mahalanobis(x)
}

/// The m-dimensional weight `w_C(x)`.
pub fn weight_m(ctx: &WaldContext, x: &Vector) -> Result<f64> {
    ctx.weight(x)
}
