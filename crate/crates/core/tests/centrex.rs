mod common;

use centrex_core::centrex::{centrex_run, classify, fuse, h_map};
use centrex_core::seed;
use centrex_core::{CentrexParams, CentroidEstimate, CompressionModel};
use common::{blobs, cholesky, gaussian, gaussian_model, sample_cov, whitened_norm};

fn r2(m: usize) -> centrex_core::RSquared {
    centrex_core::mathcore::compute_r_squared(m, 1.0, 200_000, 0x5EED).unwrap()
}

#[test]
fn fixed_point_map_at_the_true_centroid_has_the_predicted_covariance() {
    let (m, n, trials) = (5, 500, 2000);
    let model = gaussian_model(m, 9, 1.0, 3);
    let ctx = model.context(1.0, 1e-3).unwrap();
    let l = cholesky(&model);
    let r2 = r2(m);
    let mut rng = seed::stream(4, &[]);
    let phi = &l * gaussian(&mut rng, m);
    let hs: Vec<_> = (0..trials)
        .map(|_| {
            let data: Vec<_> = (0..n).map(|_| &phi + &l * gaussian(&mut rng, m)).collect();
            h_map(&ctx, &data, &phi).unwrap()
        })
        .collect();
    let target = model.covariance() * (r2.value / n as f64);
    let rel = (sample_cov(&hs) - &target).norm() / target.norm();
    assert!(rel < 0.2, "relative Frobenius error {rel}");
}

#[test]
fn separated_clusters_are_all_found() {
    let model = gaussian_model(8, 16, 1.0, 5);
    let l = cholesky(&model);
    let mut rng = seed::stream(6, &[]);
    let (centres, data, labels) = blobs(&l, 4, 150, 20.0, &mut rng);
    let res = centrex_run(&model, &data, &CentrexParams::default(), &r2(8), 7).unwrap();
    assert_eq!(res.k_found, 4);
    assert!(res.k_found <= res.estimation_passes);
    for c in &res.centroids {
        let d = centres
            .iter()
            .map(|t| whitened_norm(&l, &(&c.phi_hat - t)))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 0.5, "centroid {d} away from every truth");
    }
    // one estimated cluster per true cluster
    let mut map = [None; 4];
    for (a, &t) in res.assignments.iter().zip(&labels) {
        let a = a.unwrap();
        assert_eq!(*map[t].get_or_insert(a), a);
    }
    assert_eq!(
        res.centroids.iter().map(|c| c.n_hat).sum::<usize>(),
        data.len()
    );
}

#[test]
fn run_is_deterministic_and_seed_sensitive_only_through_starts() {
    let model = gaussian_model(6, 12, 1.0, 8);
    let l = cholesky(&model);
    let (_, data, _) = blobs(&l, 3, 100, 20.0, &mut seed::stream(9, &[]));
    let params = CentrexParams::default();
    let r2 = r2(6);
    let a = centrex_run(&model, &data, &params, &r2, 1).unwrap();
    let b = centrex_run(&model, &data, &params, &r2, 1).unwrap();
    assert_eq!(a, b);
    let c = centrex_run(&model, &data, &params, &r2, 2).unwrap();
    assert_eq!(a.k_found, c.k_found);
}

#[test]
fn rescaling_data_and_sensing_together_changes_nothing() {
    let mut rng = seed::stream(10, &[]);
    let a = common::gaussian_matrix(&mut rng, 6, 12);
    let base = CompressionModel::isotropic(a.clone(), 1.0).unwrap();
    let l = cholesky(&base);
    let (_, data, _) = blobs(&l, 3, 80, 20.0, &mut rng);
    let c = 7.5;
    let scaled = CompressionModel::isotropic(a * c, 1.0).unwrap();
    let scaled_data: Vec<_> = data.iter().map(|z| z * c).collect();
    let params = CentrexParams::default();
    let r2 = r2(6);
    let x = centrex_run(&base, &data, &params, &r2, 3).unwrap();
    let y = centrex_run(&scaled, &scaled_data, &params, &r2, 3).unwrap();
    assert_eq!(x.k_found, y.k_found);
    assert_eq!(x.assignments, y.assignments);
}

#[test]
fn fusion_is_idempotent_and_merges_duplicates() {
    let model = gaussian_model(5, 10, 1.0, 11);
    let l = cholesky(&model);
    let mut rng = seed::stream(12, &[]);
    let est = |phi: centrex_core::Vector, n_hat| CentroidEstimate {
        phi_hat: phi,
        n_hat,
        iterations: 1,
    };
    let a = &l * gaussian(&mut rng, 5) * 10.0;
    let b = &l * gaussian(&mut rng, 5) * 10.0;
    let input = vec![
        est(a.clone(), 100),
        est(b.clone(), 80),
        est(a.clone(), 120),
        est(b.clone(), 40),
    ];
    let r2 = r2(5);
    let once = fuse(&input, &model, 1.0, &r2, 1e-3).unwrap();
    assert_eq!(once.len(), 2);
    assert_eq!(once.iter().map(|c| c.n_hat).sum::<usize>(), 340);
    let twice = fuse(&once, &model, 1.0, &r2, 1e-3).unwrap();
    assert_eq!(once.len(), twice.len());
    for (x, y) in once.iter().zip(&twice) {
        assert_eq!(x.n_hat, y.n_hat);
        assert!((&x.phi_hat - &y.phi_hat).amax() < 1e-9 * x.phi_hat.amax());
    }
}

#[test]
fn classification_picks_the_whitened_nearest_centroid() {
    let model = gaussian_model(4, 8, 1.0, 13);
    let l = cholesky(&model);
    let mut rng = seed::stream(14, &[]);
    let cents: Vec<_> = (0..3)
        .map(|_| CentroidEstimate {
            phi_hat: &l * gaussian(&mut rng, 4) * 3.0,
            n_hat: 1,
            iterations: 1,
        })
        .collect();
    let data: Vec<_> = (0..200).map(|_| &l * gaussian(&mut rng, 4) * 3.0).collect();
    let labels = classify(&model, &data, &cents).unwrap();
    for (z, &k) in data.iter().zip(&labels) {
        let best = cents
            .iter()
            .map(|c| whitened_norm(&l, &(z - &c.phi_hat)))
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |a, (i, d)| if d < a.1 { (i, d) } else { a },
            );
        assert_eq!(k, best.0);
    }
}

#[test]
fn empty_input_is_rejected() {
    let model = gaussian_model(3, 6, 1.0, 15);
    let r = centrex_run(&model, &[], &CentrexParams::default(), &r2(3), 0);
    assert!(matches!(r, Err(centrex_core::Error::InvalidArgument(_))));
}
