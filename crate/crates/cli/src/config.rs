use std::fs;
use std::path::{Path, PathBuf};

use centrex_core::{CentrexParams, NetworkConfig, ScenarioConfig};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Centrex,
    Decentrex,
    /// K-means with the true number of clusters.
    Kmeans,
    KmeansAic,
    Dbscan,
    /// Gossip K-means across sensors with AIC selection of `K`.
    DecentralizedKmeans,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Centrex => "centrex",
            Algorithm::Decentrex => "decentrex",
            Algorithm::Kmeans => "kmeans",
            Algorithm::KmeansAic => "kmeans-aic",
            Algorithm::Dbscan => "dbscan",
            Algorithm::DecentralizedKmeans => "decentralized-kmeans",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    pub replicates: usize,
    /// Largest `K` tried by the AIC selection.
    pub k_max: usize,
    /// DBSCAN radius as a quantile of pairwise distances.
    pub eps_quantile: f64,
    pub min_pts: usize,
    /// Restarts `R` of decentralized K-means.
    pub restarts: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            replicates: 10,
            k_max: 10,
            eps_quantile: 0.05,
            min_pts: 5,
            restarts: 1,
        }
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![
        Algorithm::Centrex,
        Algorithm::Kmeans,
        Algorithm::KmeansAic,
        Algorithm::Dbscan,
    ]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

/// Everything needed to reproduce a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub centrex: CentrexParams,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub baselines: BaselineParams,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Noise levels to sweep; empty means `scenario.sigma` only.
    #[serde(default)]
    pub sigmas: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg = Self::from_json(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.centrex.validate()?;
        if self
            .algorithms
            .iter()
            .any(|a| matches!(a, Algorithm::Decentrex | Algorithm::DecentralizedKmeans))
        {
            self.network.validate()?;
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Usage("config lists no algorithms".into()));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(CliError::Usage("every sigma must be positive".into()));
        }
        Ok(())
    }

    /// The noise levels of the sweep, in order.
    pub fn sigma_values(&self) -> Vec<f64> {
        if self.sigmas.is_empty() {
            vec![self.scenario.sigma]
        } else {
            self.sigmas.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_losslessly() {
        let cfg = ExperimentConfig {
            scenario: ScenarioConfig {
                sigma: 0.1 + 0.2,
                ..Default::default()
            },
            centrex: CentrexParams::default(),
            network: NetworkConfig::default(),
            baselines: BaselineParams::default(),
            algorithms: vec![Algorithm::Centrex, Algorithm::KmeansAic],
            sigmas: vec![1.0, 2.5],
            trials: 3,
            output_dir: "out".into(),
            master_seed: u64::MAX,
        };
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn missing_field_is_named() {
        let err = ExperimentConfig::from_json(r#"{"scenario": {}, "trials": 2}"#).unwrap_err();
        assert!(err.to_string().contains("master_seed"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"scenario": {}, "trials": 2, "master_seed": 1, "trails": 3}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("trails"), "{err}");
    }
}
