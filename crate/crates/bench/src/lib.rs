//! Shared fixtures for the benchmarks.

use centrex_core::datagen::{gen_dataset, ClusterCount, ClusterSizes, ScenarioConfig};
use centrex_core::{CompressionModel, Dataset};

/// A non-sparse scenario with `k` balanced clusters of `n` data in total.
pub fn fixture(m: usize, n: usize, k: usize, sigma: f64) -> (Dataset, CompressionModel) {
    let cfg = ScenarioConfig {
        d: 100.max(m),
        m,
        n,
        sigma,
        k: ClusterCount::Fixed { k },
        sizes: ClusterSizes::Balanced,
        seed: 0xBE7C4,
        ..Default::default()
    };
    let ds = gen_dataset(&cfg).expect("valid scenario");
    let model = ds.model().expect("full-rank sensing");
    (ds, model)
}
