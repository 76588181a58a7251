#![allow(dead_code)]

use centrex_core::seed::{self, StreamRng};
use centrex_core::{CompressionModel, Matrix, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut StreamRng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut StreamRng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_model(m: usize, d: usize, noise_std: f64, seed_: u64) -> CompressionModel {
    let a = gaussian_matrix(&mut seed::stream(seed_, &[]), m, d);
    CompressionModel::isotropic(a, noise_std).expect("gaussian sensing has full rank")
}

/// Lower Cholesky factor of `AΣAᵀ`.
pub fn cholesky(model: &CompressionModel) -> Matrix {
    model
        .covariance()
        .clone()
        .cholesky()
        .expect("positive definite")
        .l()
}

/// `sqrt(xᵀ C⁻¹ x)` through a triangular solve with the Cholesky factor.
pub fn whitened_norm(l: &Matrix, x: &Vector) -> f64 {
    l.solve_lower_triangular(x).expect("nonsingular").norm()
}

/// `clusters` centroids at pairwise whitened distance `sep·√2` and `per`
/// points around each, drawn with covariance `L Lᵀ`.
pub fn blobs(
    l: &Matrix,
    clusters: usize,
    per: usize,
    sep: f64,
    rng: &mut StreamRng,
) -> (Vec<Vector>, Vec<Vector>, Vec<usize>) {
    let m = l.nrows();
    assert!(clusters <= m);
    let centres: Vec<Vector> = (0..clusters)
        .map(|k| {
            let mut u = Vector::zeros(m);
            u[k] = sep;
            l * u
        })
        .collect();
    let mut data = Vec::with_capacity(clusters * per);
    let mut labels = Vec::with_capacity(clusters * per);
    for (k, c) in centres.iter().enumerate() {
        for _ in 0..per {
            data.push(c + l * gaussian(rng, m));
            labels.push(k);
        }
    }
    (centres, data, labels)
}

/// Sample covariance of a set of vectors.
pub fn sample_cov(xs: &[Vector]) -> Matrix {
    let m = xs[0].len();
    let n = xs.len() as f64;
    let mean = xs.iter().fold(Vector::zeros(m), |a, x| a + x) / n;
    let mut c = Matrix::zeros(m, m);
    for x in xs {
        let d = x - &mean;
        c += &d * d.transpose();
    }
    c / (n - 1.0)
}
