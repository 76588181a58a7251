//! Command-line front end: dataset generation, single runs, Monte-Carlo
//! campaigns and the `r²` table.

pub mod campaign;
pub mod config;
mod error;
pub mod metrics;
pub mod rsq;
pub mod run;

pub use campaign::{cmd_campaign, run_campaign, write_campaign_csv, Campaign};
pub use config::{Algorithm, BaselineParams, ExperimentConfig};
pub use error::{CliError, Result};
pub use run::{cmd_gen, cmd_run, RunOptions, RunSummary};
