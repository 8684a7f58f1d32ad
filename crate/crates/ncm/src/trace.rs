//! Per-iteration trace files, CSV or JSON lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ncm_core::solver::{Branch, IterateRecord};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

impl TraceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Jsonl => "jsonl",
        }
    }

    /// `.jsonl` / `.json` select JSON lines; anything else is CSV.
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => TraceFormat::Jsonl,
            _ => TraceFormat::Csv,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" => Ok(TraceFormat::Jsonl),
            other => Err(format!("unknown trace format {other:?} (expected csv or jsonl)")),
        }
    }
}

mod branch_name {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Branch, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(b.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Branch, D::Error> {
        let name = String::deserialize(d)?;
        Branch::from_str(&name).map_err(serde::de::Error::custom)
    }
}

/// One trace row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub lambda_k: f64,
    #[serde(with = "branch_name")]
    pub branch: Branch,
    pub t_k: f64,
    pub backtracks: usize,
    pub feas_residual: f64,
}

impl From<&IterateRecord> for TraceRow {
    fn from(r: &IterateRecord) -> Self {
        Self {
            k: r.k,
            f: r.f,
            grad_norm: r.grad_norm,
            lambda_k: r.lambda_k,
            branch: r.branch,
            t_k: r.t_k,
            backtracks: r.backtracks,
            feas_residual: r.feas_residual,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_trace(path: &Path, format: TraceFormat, rows: &[TraceRow]) -> Result<()> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    match format {
        TraceFormat::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(io_err)?;
        }
        TraceFormat::Jsonl => {
            let mut w = create(path)?;
            for row in rows {
                serde_json::to_writer(&mut w, row)?;
                w.write_all(b"\n").map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_trace(path: &Path, format: TraceFormat) -> Result<Vec<TraceRow>> {
    let file = open(path)?;
    match format {
        TraceFormat::Csv => {
            let mut r = csv::Reader::from_reader(file);
            r.deserialize().map(|row| row.map_err(CliError::from)).collect()
        }
        TraceFormat::Jsonl => BufReader::new(file)
            .lines()
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
            .map(|line| {
                let line = line.map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
                Ok(serde_json::from_str(&line)?)
            })
            .collect(),
    }
}
