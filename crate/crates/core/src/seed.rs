//! Seed splitting.
//!
//! Every random stream in a campaign is derived from one master seed by
//! hashing a path of integers (purpose tag, trial index, sensor index, ...)
//! with the SplitMix64 finaliser. Streams for distinct paths are independent
//! for all practical purposes, and a stream never depends on how many values
//! another stream consumed or on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every stream.
pub type StreamRng = ChaCha8Rng;

/// Purpose tags used as the first element of a derivation path.
pub mod purpose {
    pub const NUM_CLUSTERS: u64 = 1;
    pub const CENTROIDS: u64 = 2;
    pub const SENSING: u64 = 3;
    pub const LABELS: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const SHARD: u64 = 6;
    pub const CENTREX: u64 = 7;
    pub const DECENTREX: u64 = 8;
    pub const KMEANS: u64 = 9;
    pub const TRIAL: u64 = 10;
    pub const MONTE_CARLO: u64 = 11;
    pub const PEERS: u64 = 12;
    pub const SENSOR: u64 = 13;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a derivation path.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// A generator seeded from `base` and `path`.
pub fn stream(base: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive(base, path))
}
