//! Synthetic scenarios: centroid models, sensing matrices, Gaussian noise,
//! and sharding of a dataset across sensors.
//!
//! Each generator draws from its own seed stream derived from
//! [`ScenarioConfig::seed`], so changing one part of a scenario (say the
//! sensing matrix) leaves the other draws untouched.

mod io;

pub use io::{read_dataset, sidecar_path, write_dataset, DatasetMetadata};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::CompressionModel;
use crate::seed::{self, purpose};
use crate::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CentroidModel {
    /// Each coordinate is `N(0, b²)` with probability `p`, zero otherwise.
    Sparse { p: f64 },
    /// `φ_k ~ N(0, b² I_d)`.
    NonSparse,
}

/// Entry variance of the Gaussian projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionScale {
    /// Variance `1/m`.
    Standard,
    /// Variance `m·d`.
    Unnormalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sensing {
    /// I.i.d. Gaussian entries.
    GaussianProjection { scale: ProjectionScale },
    /// Rows are distinct standard basis vectors.
    CoordinateSelection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterCount {
    Fixed {
        k: usize,
    },
    /// `K` uniform on `1..=max`.
    Uniform {
        max: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterSizes {
    /// Each datum picks its cluster uniformly at random.
    Multinomial,
    /// Sizes differ by at most one; order shuffled.
    Balanced,
    /// Explicit sizes; overrides both `k` and `n`.
    Fixed { sizes: Vec<usize> },
}

/// Full description of one synthetic scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub d: usize,
    pub m: usize,
    /// Noise standard deviation; `Σ = σ² I_d`.
    pub sigma: f64,
    /// Centroid scale.
    pub b: f64,
    pub centroid_model: CentroidModel,
    pub sensing: Sensing,
    pub k: ClusterCount,
    pub sizes: ClusterSizes,
    pub n: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            d: 100,
            m: 50,
            sigma: 2.0,
            b: 2.0,
            centroid_model: CentroidModel::NonSparse,
            sensing: Sensing::CoordinateSelection,
            k: ClusterCount::Uniform { max: 10 },
            sizes: ClusterSizes::Multinomial,
            n: 1000,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 || self.m > self.d {
            return bad(format!(
                "need 1 ≤ m ≤ d, got m = {}, d = {}",
                self.m, self.d
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return bad(format!("b must be nonnegative, got {}", self.b));
        }
        if let CentroidModel::Sparse { p } = self.centroid_model {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("sparsity probability must lie in (0, 1), got {p}"));
            }
        }
        match (&self.k, &self.sizes) {
            (_, ClusterSizes::Fixed { sizes }) => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return bad("fixed cluster sizes must be nonempty and positive".into());
                }
            }
            (ClusterCount::Fixed { k: 0 }, _) | (ClusterCount::Uniform { max: 0 }, _) => {
                return bad("number of clusters must be positive".into());
            }
            _ => {
                if self.n == 0 {
                    return bad("n must be positive".into());
                }
            }
        }
        Ok(())
    }
}

/// A generated dataset with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub config: ScenarioConfig,
    pub k: usize,
    /// Compressed measurements `Z_n`.
    pub data: Vec<Vector>,
    pub labels: Vec<usize>,
    /// Centroids in the original space (length `d`).
    pub centroids: Vec<Vector>,
    /// `A φ_k`.
    pub compressed_centroids: Vec<Vector>,
    pub sensing: Matrix,
    pub noise_covariance: Matrix,
}

impl Dataset {
    pub fn model(&self) -> Result<CompressionModel> {
        CompressionModel::new(self.sensing.clone(), self.noise_covariance.clone())
    }

    pub fn m(&self) -> usize {
        self.sensing.nrows()
    }
}

/// Number of clusters for the scenario.
pub fn gen_num_clusters(cfg: &ScenarioConfig) -> usize {
    match (&cfg.sizes, &cfg.k) {
        (ClusterSizes::Fixed { sizes }, _) => sizes.len(),
        (_, ClusterCount::Fixed { k }) => *k,
        (_, ClusterCount::Uniform { max }) => {
            seed::stream(cfg.seed, &[purpose::NUM_CLUSTERS]).random_range(1..=*max)
        }
    }
}

/// `k` centroids in the original `d`-dimensional space.
pub fn gen_centroids(cfg: &ScenarioConfig, k: usize) -> Vec<Vector> {
    let mut rng = seed::stream(cfg.seed, &[purpose::CENTROIDS]);
    (0..k)
        .map(|_| {
            Vector::from_fn(cfg.d, |_, _| match cfg.centroid_model {
                CentroidModel::NonSparse => cfg.b * rng.sample::<f64, _>(StandardNormal),
                CentroidModel::Sparse { p } => {
                    let on = rng.random_bool(p);
                    let x = cfg.b * rng.sample::<f64, _>(StandardNormal);
                    if on {
                        x
                    } else {
                        0.0
                    }
                }
            })
        })
        .collect()
}

const SENSING_ATTEMPTS: u64 = 10;

/// Full-rank `m × d` sensing matrix.
pub fn gen_sensing_matrix(cfg: &ScenarioConfig) -> Result<Matrix> {
    let (m, d) = (cfg.m, cfg.d);
    if m == 0 || m > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ m ≤ d, got m = {m}, d = {d}"
        )));
    }
    let mut rank = 0;
    for attempt in 0..SENSING_ATTEMPTS {
        let mut rng = seed::stream(cfg.seed, &[purpose::SENSING, attempt]);
        let a = match cfg.sensing {
            Sensing::CoordinateSelection => {
                let mut a = Matrix::zeros(m, d);
                for (row, col) in index::sample(&mut rng, d, m).into_iter().enumerate() {
                    a[(row, col)] = 1.0;
                }
                a
            }
            Sensing::GaussianProjection { scale } => {
                let std = match scale {
                    ProjectionScale::Standard => (1.0 / m as f64).sqrt(),
                    ProjectionScale::Unnormalized => ((m * d) as f64).sqrt(),
                };
                Matrix::from_fn(m, d, |_, _| std * rng.sample::<f64, _>(StandardNormal))
            }
        };
        rank = a.rank(1e-10 * a.amax());
        if rank == m {
            return Ok(a);
        }
    }
    Err(Error::RankDeficient { rank, expected: m })
}

fn gen_labels(cfg: &ScenarioConfig, k: usize) -> Vec<usize> {
    let mut rng = seed::stream(cfg.seed, &[purpose::LABELS]);
    match &cfg.sizes {
        ClusterSizes::Multinomial => (0..cfg.n).map(|_| rng.random_range(0..k)).collect(),
        ClusterSizes::Balanced => {
            let mut labels: Vec<usize> = (0..cfg.n).map(|i| i % k).collect();
            labels.shuffle(&mut rng);
            labels
        }
        ClusterSizes::Fixed { sizes } => {
            let mut labels: Vec<usize> = sizes
                .iter()
                .enumerate()
                .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
                .collect();
            labels.shuffle(&mut rng);
            labels
        }
    }
}

/// Draw a complete dataset: `Z_n = A (φ_{k(n)} + σ ε_n)`.
pub fn gen_dataset(cfg: &ScenarioConfig) -> Result<Dataset> {
    cfg.validate()?;
    let k = gen_num_clusters(cfg);
    let centroids = gen_centroids(cfg, k);
    let sensing = gen_sensing_matrix(cfg)?;
    let labels = gen_labels(cfg, k);

    let mut rng = seed::stream(cfg.seed, &[purpose::NOISE]);
    let data = labels
        .iter()
        .map(|&c| {
            let y = &centroids[c]
                + Vector::from_fn(cfg.d, |_, _| {
                    cfg.sigma * rng.sample::<f64, _>(StandardNormal)
                });
            &sensing * y
        })
        .collect();
    let compressed_centroids = centroids.iter().map(|c| &sensing * c).collect();
    let noise_covariance = Matrix::identity(cfg.d, cfg.d) * (cfg.sigma * cfg.sigma);
    Ok(Dataset {
        config: cfg.clone(),
        k,
        data,
        labels,
        centroids,
        compressed_centroids,
        sensing,
        noise_covariance,
    })
}

/// Random partition of `0..n` into `s` shards of equal size up to one.
pub fn shard_indices(n: usize, s: usize, seed_: u64) -> Result<Vec<Vec<usize>>> {
    if s == 0 {
        return Err(Error::InvalidArgument("need at least one shard".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::stream(seed_, &[purpose::SHARD]));
    let mut shards = vec![Vec::with_capacity(n / s + 1); s];
    for (i, idx) in order.into_iter().enumerate() {
        shards[i % s].push(idx);
    }
    Ok(shards)
}

/// Split `data` into `s` disjoint random shards.
pub fn shard(data: &[Vector], s: usize, seed_: u64) -> Result<Vec<Vec<Vector>>> {
    Ok(shard_indices(data.len(), s, seed_)?
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| data[i].clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            d: 20,
            m: 8,
            n: 200,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn coordinate_selection_rows_are_basis_vectors() {
        let a = gen_sensing_matrix(&cfg()).unwrap();
        assert_eq!((&a * a.transpose()), Matrix::identity(8, 8));
        for row in a.row_iter() {
            assert_eq!(row.iter().filter(|&&x| x != 0.0).count(), 1);
            assert_eq!(row.iter().copied().fold(0.0, f64::max), 1.0);
        }
    }

    #[test]
    fn gaussian_projection_has_full_rank() {
        for s in 0..100 {
            let c = ScenarioConfig {
                sensing: Sensing::GaussianProjection {
                    scale: ProjectionScale::Standard,
                },
                seed: s,
                ..cfg()
            };
            let a = gen_sensing_matrix(&c).unwrap();
            assert_eq!(a.rank(1e-10), 8);
        }
    }

    #[test]
    fn zero_noise_limit_collapses_clusters() {
        let c = ScenarioConfig {
            sigma: 1e-12,
            ..cfg()
        };
        let ds = gen_dataset(&c).unwrap();
        for (z, &l) in ds.data.iter().zip(&ds.labels) {
            assert!((z - &ds.compressed_centroids[l]).norm() < 1e-9);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_dataset(&cfg()).unwrap();
        let b = gen_dataset(&cfg()).unwrap();
        assert_eq!(a, b);
        let c = gen_dataset(&ScenarioConfig { seed: 4, ..cfg() }).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn fixed_sizes_and_balanced() {
        let c = ScenarioConfig {
            sizes: ClusterSizes::Fixed {
                sizes: vec![3, 5, 7],
            },
            ..cfg()
        };
        let ds = gen_dataset(&c).unwrap();
        assert_eq!(ds.k, 3);
        assert_eq!(ds.data.len(), 15);
        assert_eq!(ds.labels.iter().filter(|&&l| l == 2).count(), 7);

        let c = ScenarioConfig {
            sizes: ClusterSizes::Balanced,
            k: ClusterCount::Fixed { k: 3 },
            n: 10,
            ..cfg()
        };
        let ds = gen_dataset(&c).unwrap();
        let mut counts = [0; 3];
        ds.labels.iter().for_each(|&l| counts[l] += 1);
        assert_eq!(counts, [4, 3, 3]);
    }

    #[test]
    fn shards_partition_the_data() {
        let shards = shard_indices(1000, 20, 9).unwrap();
        assert!(shards.iter().all(|s| s.len() == 50));
        let mut all: Vec<usize> = shards.concat();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());

        let shards = shard_indices(10, 3, 9).unwrap();
        let sizes: Vec<usize> = shards.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 3, 3]);

        let single = shard_indices(7, 1, 1).unwrap();
        let mut s = single[0].clone();
        s.sort_unstable();
        assert_eq!(s, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(gen_dataset(&ScenarioConfig { m: 30, ..cfg() }).is_err());
        assert!(gen_dataset(&ScenarioConfig {
            sigma: 0.0,
            ..cfg()
        })
        .is_err());
        assert!(gen_dataset(&ScenarioConfig {
            centroid_model: CentroidModel::Sparse { p: 1.5 },
            ..cfg()
        })
        .is_err());
    }
}
