use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::special::scalar_weight;
use crate::error::{Error, Result};
use crate::seed::{self, purpose};

/// Default Monte-Carlo budget for `r²`.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// Fixed chunk size; the result does not depend on the worker count.
const CHUNK: usize = 1 << 14;

/// Variance-inflation constant of the fixed-point centroid estimator,
/// `r² = E[w²(‖Ξ‖²) Ξ₁²] / E[w(‖Ξ‖²)]²` with `Ξ ~ N(0, μ² I_m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RSquared {
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_error: f64,
    pub mu2: f64,
    pub m: usize,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            a: self.a + o.a,
            b: self.b + o.b,
            aa: self.aa + o.aa,
            bb: self.bb + o.bb,
            ab: self.ab + o.ab,
        }
    }
}

fn chunk_moments(m: usize, mu: f64, count: usize, seed: u64, chunk: u64) -> Moments {
    let mut rng = seed::stream(seed, &[purpose::MONTE_CARLO, chunk]);
    let mut acc = Moments::default();
    for _ in 0..count {
        let mut norm2 = 0.0;
        let mut first = 0.0;
        for j in 0..m {
            let x: f64 = mu * rng.sample::<f64, _>(StandardNormal);
            if j == 0 {
                first = x;
            }
            norm2 += x * x;
        }
        let w = scalar_weight(m, norm2);
        let a = w * w * first * first;
        acc.n += 1.0;
        acc.a += a;
        acc.b += w;
        acc.aa += a * a;
        acc.bb += w * w;
        acc.ab += a * w;
    }
    acc
}

/// Plain Monte-Carlo estimate of `r²`, deterministic given `seed`.
pub fn compute_r_squared(m: usize, mu2: f64, samples: usize, seed: u64) -> Result<RSquared> {
    if m == 0 || samples < 2 {
        return Err(Error::InvalidArgument(
            "r² needs m ≥ 1 and at least two samples".into(),
        ));
    }
    if !(mu2 > 0.0 && mu2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "μ² must be positive, got {mu2}"
        )));
    }
    let mu = mu2.sqrt();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            chunk_moments(m, mu, count, seed, c as u64)
        })
        .collect();
    let s = parts.into_iter().fold(Moments::default(), Moments::merge);

    let n = s.n;
    let ma = s.a / n;
    let mb = s.b / n;
    let value = ma / (mb * mb);

    // delta method for f(a, b) = a / b²
    let var_a = (s.aa / n - ma * ma) * n / (n - 1.0);
    let var_b = (s.bb / n - mb * mb) * n / (n - 1.0);
    let cov_ab = (s.ab / n - ma * mb) * n / (n - 1.0);
    let ga = 1.0 / (mb * mb);
    let gb = -2.0 * ma / (mb * mb * mb);
    let var = (ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov_ab) / n;

    Ok(RSquared {
        value,
        std_error: var.max(0.0).sqrt(),
        mu2,
        m,
        mc_samples: samples,
        mc_seed: seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = compute_r_squared(5, 1.0, 50_000, 9).unwrap();
        let b = compute_r_squared(5, 1.0, 50_000, 9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!(a.value > 0.0);
    }

    #[test]
    fn independent_of_worker_count() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| compute_r_squared(3, 2.0, 70_000, 4).unwrap());
        let parallel = compute_r_squared(3, 2.0, 70_000, 4).unwrap();
        assert_eq!(serial.value.to_bits(), parallel.value.to_bits());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(compute_r_squared(0, 1.0, 100, 0).is_err());
        assert!(compute_r_squared(2, 0.0, 100, 0).is_err());
        assert!(compute_r_squared(2, 1.0, 1, 0).is_err());
    }
}
