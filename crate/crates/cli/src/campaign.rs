use std::fs;
use std::io::Write;
use std::path::PathBuf;

use centrex_core::baselines::{
    dbscan, distance_quantile, kmeans, kmeans_aic, silhouette_with, PairwiseDistances,
};
use centrex_core::centrex::centrex_run;
use centrex_core::datagen::{gen_dataset, shard};
use centrex_core::decentrex::{decentralized_kmeans, decentrex_run};
use centrex_core::seed::{self, purpose};
use centrex_core::{Dataset, RSquared, ScenarioConfig};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::Result;
use crate::metrics::{mode, sensor_silhouette, sensor_silhouette_euclidean};
use crate::rsq::r_squared_cached;

/// Metrics of one algorithm on one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    /// For decentralized methods, the most frequent per-sensor count.
    pub k_found: usize,
    /// For decentralized methods, true only if every sensor found `K`.
    pub correct_k: bool,
    pub silhouette: Option<f64>,
    pub messages: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub sigma_index: usize,
    pub sigma: f64,
    pub trial: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub k_true: Option<usize>,
    pub outcome: std::result::Result<Metrics, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub sigma: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub ok: usize,
    pub mean_k_true: f64,
    pub mean_k_found: f64,
    pub correct_k_rate: f64,
    pub mean_silhouette: Option<f64>,
    pub mean_messages: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Campaign {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Seed of trial `trial`. It does not depend on the noise level, so a sweep
/// reuses the same clusters, sensing matrix and noise directions at every
/// `σ` (common random numbers).
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    seed::derive(master, &[purpose::TRIAL, trial as u64])
}

fn needs_r2(algos: &[Algorithm]) -> bool {
    algos
        .iter()
        .any(|a| matches!(a, Algorithm::Centrex | Algorithm::Decentrex))
}

/// Run one algorithm on a generated dataset and score it on the pooled data.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    algo: Algorithm,
    ds: &Dataset,
    dist: &PairwiseDistances,
    r2: Option<&RSquared>,
    seed_: u64,
) -> centrex_core::Result<Metrics> {
    let data = &ds.data;
    let bp = &cfg.baselines;
    let single = |k_found: usize, assignments: &[Option<usize>]| Metrics {
        k_found,
        correct_k: k_found == ds.k,
        silhouette: silhouette_with(dist, assignments),
        messages: None,
    };
    let r2 = || r2.expect("r² computed for centrex variants");
    Ok(match algo {
        Algorithm::Centrex => {
            let model = ds.model()?;
            let res = centrex_run(&model, data, &cfg.centrex, r2(), seed_)?;
            single(res.k_found, &res.assignments)
        }
        Algorithm::Kmeans => {
            let res = kmeans(data, ds.k, bp.replicates, seed_)?;
            single(res.k_found, &res.assignments)
        }
        Algorithm::KmeansAic => {
            let res = kmeans_aic(data, bp.k_max, bp.replicates, seed_)?.best;
            single(res.k_found, &res.assignments)
        }
        Algorithm::Dbscan => {
            let eps = distance_quantile(data, bp.eps_quantile)
                .unwrap_or(1.0)
                .max(f64::MIN_POSITIVE);
            let res = dbscan(data, eps, bp.min_pts)?;
            single(res.k_found, &res.assignments)
        }
        Algorithm::Decentrex => {
            let model = ds.model()?;
            let net = centrex_core::NetworkConfig {
                seed: seed_,
                ..cfg.network.clone()
            };
            let shards = shard(data, net.sensors, seed_)?;
            let out = decentrex_run(&shards, &model, &net, &cfg.centrex, r2(), seed_)?;
            let cents: Vec<_> = out.sensors.iter().map(|r| r.centroids.clone()).collect();
            Metrics {
                k_found: mode(&out.k_found),
                correct_k: out.k_found.iter().all(|&k| k == ds.k),
                silhouette: sensor_silhouette(&model, data, dist, &cents)?,
                messages: Some(out.ledger.scalars_sent),
            }
        }
        Algorithm::DecentralizedKmeans => {
            let net = centrex_core::NetworkConfig {
                seed: seed_,
                ..cfg.network.clone()
            };
            let shards = shard(data, net.sensors, seed_)?;
            let out = decentralized_kmeans(&shards, &net, bp.k_max, bp.restarts, seed_)?;
            let ks: Vec<usize> = out.sensors.iter().map(|r| r.k_found).collect();
            let cents: Vec<_> = out.sensors.iter().map(|r| r.centroids.clone()).collect();
            Metrics {
                k_found: mode(&ks),
                correct_k: ks.iter().all(|&k| k == ds.k),
                silhouette: sensor_silhouette_euclidean(data, dist, &cents),
                messages: Some(out.ledger.scalars_sent),
            }
        }
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    sigma_index: usize,
    sigma: f64,
    trial: usize,
    r2: Option<&RSquared>,
) -> Vec<TrialRow> {
    let seed_ = trial_seed(cfg.master_seed, trial);
    let scenario = ScenarioConfig {
        sigma,
        seed: seed_,
        ..cfg.scenario.clone()
    };
    let row = |algorithm, k_true, outcome| TrialRow {
        sigma_index,
        sigma,
        trial,
        algorithm,
        seed: seed_,
        k_true,
        outcome,
    };
    let ds = match gen_dataset(&scenario) {
        Ok(ds) => ds,
        Err(e) => {
            warn!("trial {trial} (sigma {sigma}): data generation failed: {e}");
            return cfg
                .algorithms
                .iter()
                .map(|&a| row(a, None, Err(e.to_string())))
                .collect();
        }
    };
    let dist = PairwiseDistances::new(&ds.data);
    cfg.algorithms
        .iter()
        .map(|&a| {
            let outcome = run_algorithm(cfg, a, &ds, &dist, r2, seed_).map_err(|e| {
                warn!("trial {trial} (sigma {sigma}) {}: {e}", a.name());
                e.to_string()
            });
            row(a, Some(ds.k), outcome)
        })
        .collect()
}

fn aggregate(rows: &[TrialRow], sigma: f64, algorithm: Algorithm) -> AggregateRow {
    let mine: Vec<&TrialRow> = rows
        .iter()
        .filter(|r| r.algorithm == algorithm && r.sigma.to_bits() == sigma.to_bits())
        .collect();
    let ok: Vec<(&TrialRow, &Metrics)> = mine
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|m| (*r, m)))
        .collect();
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    AggregateRow {
        sigma,
        algorithm,
        trials: mine.len(),
        ok: ok.len(),
        mean_k_true: mean(
            ok.iter()
                .filter_map(|(r, _)| r.k_true.map(|k| k as f64))
                .collect(),
        )
        .unwrap_or(f64::NAN),
        mean_k_found: mean(ok.iter().map(|(_, m)| m.k_found as f64).collect()).unwrap_or(f64::NAN),
        correct_k_rate: mean(
            ok.iter()
                .map(|(_, m)| f64::from(u8::from(m.correct_k)))
                .collect(),
        )
        .unwrap_or(f64::NAN),
        mean_silhouette: mean(ok.iter().filter_map(|(_, m)| m.silhouette).collect()),
        mean_messages: mean(
            ok.iter()
                .filter_map(|(_, m)| m.messages.map(|x| x as f64))
                .collect(),
        ),
    }
}

/// Run the whole campaign. Rows come out sorted by noise level, trial and
/// algorithm regardless of scheduling.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<Campaign> {
    cfg.validate()?;
    let r2 = if needs_r2(&cfg.algorithms) {
        Some(r_squared_cached(
            cfg.scenario.m,
            1.0,
            cfg.centrex.r2_samples,
            cfg.centrex.r2_seed,
        )?)
    } else {
        None
    };
    let sigmas = cfg.sigma_values();
    let jobs: Vec<(usize, f64, usize)> = sigmas
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| (0..cfg.trials).map(move |t| (i, s, t)))
        .collect();
    info!(
        "campaign: {} trials over {} noise levels",
        cfg.trials,
        sigmas.len()
    );
    let mut rows: Vec<TrialRow> = jobs
        .par_iter()
        .flat_map_iter(|&(i, s, t)| run_trial(cfg, i, s, t, r2.as_ref()))
        .collect();
    rows.sort_by_key(|r| (r.sigma_index, r.trial, r.algorithm));
    let mut algos = cfg.algorithms.clone();
    algos.sort();
    algos.dedup();
    let aggregates = sigmas
        .iter()
        .flat_map(|&s| algos.iter().map(move |&a| (s, a)))
        .map(|(s, a)| aggregate(&rows, s, a))
        .collect();
    Ok(Campaign { rows, aggregates })
}

pub const CAMPAIGN_COLUMNS: [&str; 10] = [
    "trial",
    "algorithm",
    "sigma",
    "seed",
    "k_true",
    "k_found",
    "correct_k",
    "silhouette",
    "messages",
    "status",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Write trial rows followed by one aggregate row (`trial = all`) per
/// algorithm and noise level.
pub fn write_campaign_csv<W: Write>(c: &Campaign, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CAMPAIGN_COLUMNS)?;
    for r in &c.rows {
        let (k_found, correct, sil, msgs, status) = match &r.outcome {
            Ok(m) => (
                m.k_found.to_string(),
                u8::from(m.correct_k).to_string(),
                opt(m.silhouette.map(float)),
                opt(m.messages),
                "ok".to_string(),
            ),
            Err(e) => (
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {e}"),
            ),
        };
        w.write_record([
            r.trial.to_string(),
            r.algorithm.name().to_string(),
            float(r.sigma),
            r.seed.to_string(),
            opt(r.k_true),
            k_found,
            correct,
            sil,
            msgs,
            status,
        ])?;
    }
    for a in &c.aggregates {
        w.write_record([
            "all".to_string(),
            a.algorithm.name().to_string(),
            float(a.sigma),
            String::new(),
            float(a.mean_k_true),
            float(a.mean_k_found),
            float(a.correct_k_rate),
            opt(a.mean_silhouette.map(float)),
            opt(a.mean_messages.map(float)),
            format!("{}/{} ok", a.ok, a.trials),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Load the config, run the campaign and write `campaign.csv` into the
/// output directory. Returns the path written.
pub fn cmd_campaign(
    config_path: &std::path::Path,
    out_dir: Option<PathBuf>,
    seed_override: Option<u64>,
) -> Result<PathBuf> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed_override {
        cfg.master_seed = s;
    }
    let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;
    let campaign = run_campaign(&cfg)?;
    let path = dir.join("campaign.csv");
    write_campaign_csv(&campaign, std::io::BufWriter::new(fs::File::create(&path)?))?;
    Ok(path)
}
