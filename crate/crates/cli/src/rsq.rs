use std::env;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use centrex_core::mathcore::compute_r_squared;
use centrex_core::RSquared;
use log::{debug, warn};

use crate::error::Result;

pub const CACHE_ENV: &str = "CENTREX_CACHE_DIR";

fn cache_file(m: usize, mu2: f64, samples: usize, seed: u64) -> Option<PathBuf> {
    let dir = env::var_os(CACHE_ENV)?;
    Some(PathBuf::from(dir).join(format!(
        "rsq-m{m}-mu2_{:016x}-n{samples}-s{seed:016x}.json",
        mu2.to_bits()
    )))
}

/// `r²` for `(m, μ²)`, read from or written to the cache directory named by
/// `CENTREX_CACHE_DIR` when it is set.
pub fn r_squared_cached(m: usize, mu2: f64, samples: usize, seed: u64) -> Result<RSquared> {
    let path = cache_file(m, mu2, samples, seed);
    if let Some(p) = &path {
        if let Ok(text) = fs::read_to_string(p) {
            match serde_json::from_str::<RSquared>(&text) {
                Ok(r)
                    if r.m == m && r.mu2 == mu2 && r.mc_samples == samples && r.mc_seed == seed =>
                {
                    debug!("r² cache hit {}", p.display());
                    return Ok(r);
                }
                _ => warn!("ignoring stale r² cache entry {}", p.display()),
            }
        }
    }
    let r = compute_r_squared(m, mu2, samples, seed)?;
    if let Some(p) = &path {
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(p, serde_json::to_string(&r).expect("serializable"))?;
    }
    Ok(r)
}

/// `r²` over every `m` in `ms` and `μ²` in `mu2s`.
pub fn rsq_table(ms: &[usize], mu2s: &[f64], samples: usize, seed: u64) -> Result<Vec<RSquared>> {
    let mut out = Vec::with_capacity(ms.len() * mu2s.len());
    for &m in ms {
        for &mu2 in mu2s {
            out.push(r_squared_cached(m, mu2, samples, seed)?);
        }
    }
    Ok(out)
}

pub fn write_rsq_csv<W: Write>(rows: &[RSquared], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "mu2", "r2", "std_error", "samples", "seed"])?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            format!("{:.16e}", r.mu2),
            format!("{:.16e}", r.value),
            format!("{:.16e}", r.std_error),
            r.mc_samples.to_string(),
            r.mc_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
