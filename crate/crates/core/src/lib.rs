//! Clustering of compressed Gaussian measurement vectors without prior
//! knowledge of the number of clusters.
//!
//! The crate is organised bottom-up:
//!
//! * [`mathcore`]: whitening, Mahalanobis norms, the Marcum-Q weight
//!   function, Wald thresholds and the Monte-Carlo variance constant `r²`.
//! * [`wald`]: the four hypothesis tests used for marking, membership and
//!   centroid fusion.
//! * [`centrex`]: the centralized algorithm (fixed-point centroid estimation,
//!   fusion, nearest-centroid classification).
//! * [`decentrex`]: a deterministic slot-synchronous simulator of the
//!   decentralized protocol with exact message accounting, plus a
//!   decentralized K-means baseline.
//! * [`datagen`]: synthetic scenarios (centroid models, sensing matrices,
//!   sharding) and dataset files.
//! * [`baselines`]: K-means, K-means with AIC selection, DB-SCAN, silhouette
//!   and correct-K rate.
//!
//! All randomness is derived from explicit seeds through [`seed`].

pub mod baselines;
pub mod centrex;
pub mod datagen;
pub mod decentrex;
mod error;
pub mod mathcore;
pub mod seed;
pub mod wald;

pub use centrex::{CentrexParams, CentroidEstimate, ClusteringResult};
pub use datagen::{Dataset, ScenarioConfig};
pub use decentrex::{MessageLedger, NetworkConfig};
pub use error::{Error, Result};
pub use mathcore::{CompressionModel, RSquared, WaldContext};
pub use wald::{Hypothesis, TestDecision, WaldTests};

/// A compressed measurement vector (length `m`).
pub type Vector = nalgebra::DVector<f64>;
/// A dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
