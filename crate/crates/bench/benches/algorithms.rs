use centrex_bench::fixture;
use centrex_core::baselines::{dbscan, distance_quantile, kmeans, silhouette};
use centrex_core::centrex::centrex_run;
use centrex_core::datagen::shard;
use centrex_core::decentrex::decentrex_run;
use centrex_core::{CentrexParams, NetworkConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn centralized(c: &mut Criterion) {
    let params = CentrexParams::default();
    let r2 = params.r_squared(50).unwrap();
    let mut g = c.benchmark_group("centrex_run");
    g.sample_size(10);
    for n in [500usize, 1000, 2000] {
        let (ds, model) = fixture(50, n, 5, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &ds.data, |b, data| {
            b.iter(|| centrex_run(&model, data, &params, &r2, 7).unwrap())
        });
    }
    g.finish();
}

fn decentralized(c: &mut Criterion) {
    let params = CentrexParams::default();
    let r2 = params.r_squared(50).unwrap();
    let (ds, model) = fixture(50, 1000, 5, 1.0);
    let net = NetworkConfig::default();
    let shards = shard(&ds.data, net.sensors, 3).unwrap();
    let mut g = c.benchmark_group("decentrex_run");
    g.sample_size(10);
    g.bench_function("s20_t10_j2", |b| {
        b.iter(|| decentrex_run(&shards, &model, &net, &params, &r2, 7).unwrap())
    });
    g.finish();
}

fn baselines(c: &mut Criterion) {
    let (ds, _) = fixture(50, 1000, 5, 1.0);
    let mut g = c.benchmark_group("baselines");
    g.sample_size(10);
    g.bench_function("kmeans/k5_r10", |b| {
        b.iter(|| kmeans(&ds.data, 5, 10, 1).unwrap())
    });
    let eps = distance_quantile(&ds.data, 0.05).unwrap();
    g.bench_function("dbscan", |b| b.iter(|| dbscan(&ds.data, eps, 5).unwrap()));
    let labels: Vec<_> = ds.labels.iter().map(|&l| Some(l)).collect();
    g.bench_function("silhouette", |b| {
        b.iter(|| silhouette(&ds.data, &labels).unwrap())
    });
    g.finish();
}

criterion_group!(benches, centralized, decentralized, baselines);
criterion_main!(benches);
