//! Matrix files: JSON `{"n": <int>, "entries": [[...], ...]}` or CSV with
//! `n` rows of `n` comma-separated decimals. Writers use 17 significant
//! digits so every `f64` round-trips.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Json,
    Csv,
}

#[derive(Deserialize)]
struct MatrixDoc {
    n: usize,
    entries: Vec<Vec<f64>>,
}

/// Parses either format; JSON is recognised by a leading `{`.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

fn parse_json(text: &str) -> Result<Matrix> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    if doc.entries.len() != doc.n {
        return Err(Error::Validation(format!(
            "\"n\" is {} but \"entries\" has {} rows",
            doc.n,
            doc.entries.len()
        )));
    }
    Matrix::from_rows(&doc.entries)
}

fn parse_csv(text: &str) -> Result<Matrix> {
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, line)| {
            line.split(',')
                .map(|field| {
                    field.trim().parse::<f64>().map_err(|e| {
                        Error::Parse(format!("line {}: {:?}: {e}", lineno + 1, field.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(&rows)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_json(m: &Matrix) -> String {
    let mut out = format!("{{\"n\": {}, \"entries\": [", m.n());
    for i in 0..m.n() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt17(v)).collect();
        out.push_str(&row.join(", "));
        out.push(']');
    }
    out.push_str("]}\n");
    out
}

pub fn write_matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt17(v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
