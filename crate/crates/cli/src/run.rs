use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use centrex_core::baselines::{
    dbscan, distance_quantile, kmeans, kmeans_aic, silhouette_with, PairwiseDistances,
};
use centrex_core::centrex::centrex_run;
use centrex_core::datagen::{gen_dataset, read_dataset, shard_indices, write_dataset};
use centrex_core::decentrex::{decentrex_run, write_trace_csv};
use centrex_core::Vector;
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::metrics::{mode, sensor_silhouette};
use crate::rsq::r_squared_cached;

/// Generate the dataset described by the config's scenario and write it
/// (CSV plus sidecar) to `out`.
pub fn cmd_gen(config_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let mut scenario = cfg.scenario;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let ds = gen_dataset(&scenario)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_dataset(&ds, out)?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub algo: Algorithm,
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub min_pts: Option<usize>,
    /// Algorithm parameters; defaults when absent.
    pub config: Option<ExperimentConfig>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub algorithm: &'static str,
    pub k_found: usize,
    pub silhouette: Option<f64>,
    pub runtime_seconds: f64,
    pub messages: Option<u64>,
}

fn write_centroids(path: &Path, rows: &[(Option<usize>, usize, &Vector)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let m = rows.first().map_or(0, |r| r.2.len());
    let mut header = vec!["sensor".to_string(), "cluster".to_string()];
    header.extend((0..m).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    for (sensor, k, c) in rows {
        let mut rec = vec![
            sensor.map_or_else(String::new, |s| s.to_string()),
            k.to_string(),
        ];
        rec.extend(c.iter().map(|x| format!("{x:.16e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_assignments(path: &Path, rows: &[(usize, Option<usize>, Option<usize>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["index", "sensor", "label"])?;
    for (i, sensor, label) in rows {
        w.write_record([
            i.to_string(),
            sensor.map_or_else(String::new, |s| s.to_string()),
            label.map_or_else(String::new, |l| l.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Run one algorithm on a dataset file. Writes `assignments.csv`,
/// `centroids.csv`, `metrics.json`, and for the decentralized algorithm
/// `ledger.csv` (per-slot trace).
pub fn cmd_run(opts: &RunOptions) -> Result<RunSummary> {
    let cfg = opts.config.clone();
    let centrex_params = cfg.as_ref().map(|c| c.centrex.clone()).unwrap_or_default();
    let network = cfg.as_ref().map(|c| c.network.clone()).unwrap_or_default();
    let bp = cfg
        .as_ref()
        .map(|c| c.baselines.clone())
        .unwrap_or_default();

    if opts.algo == Algorithm::Kmeans && opts.k.is_none() {
        return Err(CliError::Usage("--algo kmeans requires --k".into()));
    }
    let ds = read_dataset(&opts.dataset)?;
    fs::create_dir_all(&opts.out_dir)?;
    let data = &ds.data;
    let dist = PairwiseDistances::new(data);
    let start = Instant::now();

    let mut assignments: Vec<(usize, Option<usize>, Option<usize>)> = Vec::new();
    let mut centroids: Vec<(Option<usize>, usize, Vector)> = Vec::new();
    let mut messages = None;
    let (k_found, silhouette) = match opts.algo {
        Algorithm::Centrex | Algorithm::Decentrex => {
            let model = ds.model()?;
            let r2 = r_squared_cached(
                ds.m(),
                1.0,
                centrex_params.r2_samples,
                centrex_params.r2_seed,
            )?;
            if opts.algo == Algorithm::Centrex {
                let res = centrex_run(&model, data, &centrex_params, &r2, opts.seed)?;
                assignments = res
                    .assignments
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| (i, None, a))
                    .collect();
                centroids = res
                    .centroids
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (None, k, c.phi_hat.clone()))
                    .collect();
                (res.k_found, silhouette_with(&dist, &res.assignments))
            } else {
                let net = centrex_core::NetworkConfig {
                    seed: opts.seed,
                    ..network
                };
                net.validate()?;
                let idx = shard_indices(data.len(), net.sensors, opts.seed)?;
                let shards: Vec<Vec<Vector>> = idx
                    .iter()
                    .map(|s| s.iter().map(|&i| data[i].clone()).collect())
                    .collect();
                let out = decentrex_run(&shards, &model, &net, &centrex_params, &r2, opts.seed)?;
                for (s, (res, ids)) in out.sensors.iter().zip(&idx).enumerate() {
                    assignments.extend(
                        ids.iter()
                            .zip(&res.assignments)
                            .map(|(&i, &a)| (i, Some(s), a)),
                    );
                    centroids.extend(
                        res.centroids
                            .iter()
                            .enumerate()
                            .map(|(k, c)| (Some(s), k, c.phi_hat.clone())),
                    );
                }
                assignments.sort_by_key(|r| r.0);
                write_trace_csv(
                    &out.trace,
                    BufWriter::new(File::create(opts.out_dir.join("ledger.csv"))?),
                )?;
                messages = Some(out.ledger.scalars_sent);
                let cents: Vec<_> = out.sensors.iter().map(|r| r.centroids.clone()).collect();
                (
                    mode(&out.k_found),
                    sensor_silhouette(&model, data, &dist, &cents)?,
                )
            }
        }
        Algorithm::Kmeans | Algorithm::KmeansAic | Algorithm::Dbscan => {
            let res = match opts.algo {
                Algorithm::Kmeans => {
                    kmeans(data, opts.k.expect("checked"), bp.replicates, opts.seed)?
                }
                Algorithm::KmeansAic => {
                    kmeans_aic(data, opts.k.unwrap_or(bp.k_max), bp.replicates, opts.seed)?.best
                }
                _ => {
                    let eps = match opts.eps {
                        Some(e) => e,
                        None => distance_quantile(data, bp.eps_quantile).ok_or_else(|| {
                            CliError::Usage("dbscan needs --eps for fewer than two data".into())
                        })?,
                    };
                    dbscan(data, eps, opts.min_pts.unwrap_or(bp.min_pts))?
                }
            };
            assignments = res
                .assignments
                .iter()
                .enumerate()
                .map(|(i, &a)| (i, None, a))
                .collect();
            centroids = res
                .centroids
                .iter()
                .enumerate()
                .map(|(k, c)| (None, k, c.clone()))
                .collect();
            (res.k_found, silhouette_with(&dist, &res.assignments))
        }
        Algorithm::DecentralizedKmeans => {
            return Err(CliError::Usage(
                "decentralized-kmeans is only available in campaigns".into(),
            ))
        }
    };
    let summary = RunSummary {
        algorithm: opts.algo.name(),
        k_found,
        silhouette,
        runtime_seconds: start.elapsed().as_secs_f64(),
        messages,
    };
    write_assignments(&opts.out_dir.join("assignments.csv"), &assignments)?;
    let crefs: Vec<(Option<usize>, usize, &Vector)> =
        centroids.iter().map(|(s, k, c)| (*s, *k, c)).collect();
    write_centroids(&opts.out_dir.join("centroids.csv"), &crefs)?;
    let mut f = BufWriter::new(File::create(opts.out_dir.join("metrics.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary).expect("serializable");
    writeln!(f)?;
    f.flush()?;
    Ok(summary)
}
