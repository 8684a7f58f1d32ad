//! Text formats for matrices and graphs.
//!
//! Matrices: a `rows cols` header followed by `rows * cols` whitespace
//! separated values in row-major order. Graphs: one `u v w` edge per line,
//! 0-indexed vertices. In both, blank lines and lines starting with `#` are
//! skipped.

use std::fs;
use std::path::Path;

use ncm_core::DMatrix;

use crate::{CliError, Result};

/// `(u, v, weight)`.
pub type Edge = (usize, usize, f64);

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_error(path: &Path, message: String) -> CliError {
    CliError::Parse { path: path.to_path_buf(), message }
}

pub fn parse_matrix(text: &str) -> std::result::Result<DMatrix<f64>, String> {
    let mut tokens = content_lines(text).flat_map(|(line, l)| l.split_whitespace().map(move |t| (line, t)));
    let mut header = |what: &str| -> std::result::Result<usize, String> {
        let (line, tok) = tokens.next().ok_or_else(|| format!("missing {what} in header"))?;
        tok.parse().map_err(|_| format!("line {line}: bad {what} {tok:?}"))
    };
    let rows = header("row count")?;
    let cols = header("column count")?;
    let mut values = Vec::with_capacity(rows * cols);
    for (line, tok) in tokens {
        let v: f64 = tok.parse().map_err(|_| format!("line {line}: bad number {tok:?}"))?;
        values.push(v);
    }
    if values.len() != rows * cols {
        return Err(format!("expected {} values for a {rows}x{cols} matrix, found {}", rows * cols, values.len()));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn parse_edges(text: &str) -> std::result::Result<Vec<Edge>, String> {
    content_lines(text)
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(format!("line {line}: expected `u v w`, found {} fields", fields.len()));
            }
            let u = fields[0].parse().map_err(|_| format!("line {line}: bad vertex {:?}", fields[0]))?;
            let v = fields[1].parse().map_err(|_| format!("line {line}: bad vertex {:?}", fields[1]))?;
            let w = fields[2].parse().map_err(|_| format!("line {line}: bad weight {:?}", fields[2]))?;
            Ok((u, v, w))
        })
        .collect()
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&read(path)?).map_err(|m| parse_error(path, m))
}

pub fn read_edges(path: &Path) -> Result<Vec<Edge>> {
    parse_edges(&read(path)?).map_err(|m| parse_error(path, m))
}
