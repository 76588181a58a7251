use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use centrex_cli::rsq::{rsq_table, write_rsq_csv};
use centrex_cli::{
    cmd_campaign, cmd_gen, cmd_run, Algorithm, CliError, ExperimentConfig, RunOptions,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "centrex",
    version,
    about = "Clustering of compressed measurements without a known number of clusters"
)]
struct Cli {
    /// Worker threads for campaigns (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (CSV plus .meta.json sidecar).
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one algorithm on a dataset file.
    Run {
        dataset: PathBuf,
        #[arg(long, value_enum)]
        algo: Algorithm,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of clusters (kmeans) or largest K tried (kmeans-aic).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        min_pts: Option<usize>,
        /// Experiment config supplying algorithm parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a Monte-Carlo campaign and write campaign.csv.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute (and cache) r² for m = 1..=m-max and μ² ∈ {1, 2}.
    Rsq {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        m_max: usize,
        #[arg(long, default_value_t = centrex_core::mathcore::DEFAULT_MC_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = centrex_core::CentrexParams::default().r2_seed)]
        seed: u64,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Gen { config, out, seed } => cmd_gen(&config, &out, seed),
        Command::Run {
            dataset,
            algo,
            out,
            seed,
            k,
            eps,
            min_pts,
            config,
        } => {
            let config = config.map(|p| ExperimentConfig::load(&p)).transpose()?;
            let summary = cmd_run(&RunOptions {
                algo,
                dataset,
                out_dir: out,
                seed,
                k,
                eps,
                min_pts,
                config,
            })?;
            println!("{}", serde_json::to_string(&summary).expect("serializable"));
            Ok(())
        }
        Command::Campaign { config, out, seed } => {
            let path = cmd_campaign(&config, out, seed)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Rsq {
            out,
            m_max,
            samples,
            seed,
        } => {
            let ms: Vec<usize> = (1..=m_max).collect();
            let rows = rsq_table(&ms, &[1.0, 2.0], samples, seed)?;
            write_rsq_csv(&rows, BufWriter::new(File::create(out)?))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
