use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::run::{Row, RunRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub const BASE_COLUMNS: [&str; 5] = ["t", "s_eps", "s_eps_norm", "dissipation", "w2"];

/// 17 significant digits, enough for an exact `f64` round trip.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn n_eigen_columns(rows: &[Row]) -> usize {
    rows.first().map_or(0, |r| r.eigenvalues.len())
}

pub fn header(n_eigen: usize) -> Vec<String> {
    BASE_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((1..=n_eigen).map(|i| format!("lambda_{i}")))
        .collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(n_eigen_columns(rows))).expect("in-memory write");
    for r in rows {
        let fields = [r.t, r.s_eps, r.s_eps_norm, r.dissipation, r.w2]
            .into_iter()
            .chain(r.eigenvalues.iter().copied())
            .map(num);
        w.write_record(fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>, ParseError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let head: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let n_eigen = head.len().saturating_sub(BASE_COLUMNS.len());
    if head != header(n_eigen) {
        return Err(ParseError::Header(head));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ParseError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        rows.push(Row {
            t: vals[0],
            s_eps: vals[1],
            s_eps_norm: vals[2],
            dissipation: vals[3],
            w2: vals[4],
            eigenvalues: vals[5..].to_vec(),
        });
    }
    Ok(rows)
}

pub fn to_json(record: &RunRecord) -> String {
    serde_json::to_string_pretty(record).expect("run records always serialize")
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<id>.csv` plus a `<id>.summary.json` sidecar, or a single
/// `<id>.json`. Returns the paths written.
pub fn emit(record: &RunRecord, format: Format, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        Format::Csv => {
            let data = dir.join(format!("{}.csv", record.id));
            write(&data, &to_csv(&record.rows))?;
            let summary = RunRecord {
                rows: Vec::new(),
                ..record.clone()
            };
            let side = dir.join(format!("{}.summary.json", record.id));
            write(&side, &to_json(&summary))?;
            Ok(vec![data, side])
        }
        Format::Json => {
            let path = dir.join(format!("{}.json", record.id));
            write(&path, &to_json(record))?;
            Ok(vec![path])
        }
    }
}
