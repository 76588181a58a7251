//! Linear algebra and special-function kernel.
//!
//! Everything the clustering algorithms need to measure distances and
//! weights: the whitening of a positive-definite matrix, the Mahalanobis
//! norm `ν_C(x) = ‖Ψx‖`, the generalized Marcum function `Q_{m/2}(0, b)`
//! (through the regularized upper incomplete gamma function), Wald
//! thresholds, and the Monte-Carlo constant `r²` of the centroid estimator.

mod rsq;
mod special;
mod whitening;

pub use rsq::{compute_r_squared, RSquared, DEFAULT_MC_SAMPLES};
pub use special::{
    invert_threshold, ln_gamma, marcum_q_half_m, regularized_gamma_q, scalar_weight,
};
pub use whitening::{mahalanobis, weight_m, whiten, CompressionModel, WaldContext};
