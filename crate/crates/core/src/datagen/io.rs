use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, ScenarioConfig};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Contents of the JSON sidecar written next to a dataset CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub sensing: Vec<Vec<f64>>,
    pub noise_covariance: Vec<Vec<f64>>,
    pub centroids: Vec<Vec<f64>>,
    pub compressed_centroids: Vec<Vec<f64>>,
}

/// `data.csv` -> `data.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Data(format!("{what}: ragged rows")));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn vecs(v: &[Vector]) -> Vec<Vec<f64>> {
    v.iter().map(|x| x.iter().copied().collect()).collect()
}

/// Write `ds` as CSV (`z0, …, z{m-1}, label`) plus a JSON sidecar.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let m = ds.m();
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = (0..m).map(|i| format!("z{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    for (z, label) in ds.data.iter().zip(&ds.labels) {
        let mut rec: Vec<String> = z.iter().map(|x| format!("{x:.16e}")).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;

    let meta = DatasetMetadata {
        config: ds.config.clone(),
        seed: ds.config.seed,
        k: ds.k,
        n: ds.data.len(),
        sensing: rows(&ds.sensing),
        noise_covariance: rows(&ds.noise_covariance),
        centroids: vecs(&ds.centroids),
        compressed_centroids: vecs(&ds.compressed_centroids),
    };
    let mut f = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut f, &meta).map_err(|e| Error::Data(e.to_string()))?;
    f.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Data(format!("{other:?}")),
    }
}

/// Read a dataset written by [`write_dataset`].
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let meta_path = sidecar_path(path);
    let meta: DatasetMetadata = serde_json::from_reader(BufReader::new(File::open(&meta_path)?))
        .map_err(|e| Error::Data(format!("{}: {e}", meta_path.display())))?;
    let sensing = from_rows(&meta.sensing, "sensing matrix")?;
    let noise_covariance = from_rows(&meta.noise_covariance, "noise covariance")?;
    let m = sensing.nrows();

    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() != m + 1 {
        return Err(Error::Data(format!(
            "{}: expected {} columns, header has {}",
            path.display(),
            m + 1,
            header.len()
        )));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Data(format!("{}:{line}: {e}", path.display()))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field_err = |col: usize, s: &str| {
            Error::Data(format!(
                "{}:{line}: bad value {s:?} in column {col}",
                path.display()
            ))
        };
        let z = rec
            .iter()
            .take(m)
            .enumerate()
            .map(|(col, s)| s.trim().parse::<f64>().map_err(|_| field_err(col, s)))
            .collect::<Result<Vec<f64>>>()?;
        let label_str = &rec[m];
        let label = label_str
            .trim()
            .parse::<usize>()
            .map_err(|_| field_err(m, label_str))?;
        data.push(Vector::from_vec(z));
        labels.push(label);
    }
    if data.len() != meta.n {
        return Err(Error::Data(format!(
            "{}: sidecar declares {} rows, found {}",
            path.display(),
            meta.n,
            data.len()
        )));
    }
    let to_vecs = |v: Vec<Vec<f64>>| v.into_iter().map(Vector::from_vec).collect();
    Ok(Dataset {
        config: meta.config,
        k: meta.k,
        data,
        labels,
        centroids: to_vecs(meta.centroids),
        compressed_centroids: to_vecs(meta.compressed_centroids),
        sensing,
        noise_covariance,
    })
}
