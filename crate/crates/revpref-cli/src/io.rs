//! File formats: instance JSON, price-sequence CSV, and the common output
//! conventions (schema header, 17-significant-digit floats).

use std::fs;
use std::path::Path;

use revpref::{validate_instance, MarketInstance, PriceVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CSV_SCHEMA_HEADER: &str = "# schema=1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed instance {path}: {message}")]
    BadInstance { path: String, message: String },
    #[error("malformed price file {path} line {line}: {message}")]
    BadPrices { path: String, line: usize, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub v: Vec<f64>,
    pub c: Vec<f64>,
    pub budget: f64,
    pub delta: f64,
}

pub fn read_instance(path: &Path) -> Result<MarketInstance, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: InstanceFile =
        serde_json::from_str(&text).map_err(|e| IoError::BadInstance {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    MarketInstance::new(file.v, file.c, file.budget, file.delta).map_err(|e| {
        IoError::BadInstance { path: path.display().to_string(), message: e.to_string() }
    })
}

pub fn write_instance(path: &Path, inst: &MarketInstance) -> Result<(), IoError> {
    debug_assert!(validate_instance(inst).is_ok());
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"v\": [{}],\n", join_floats(&inst.v)));
    out.push_str(&format!("  \"c\": [{}],\n", join_floats(&inst.c)));
    out.push_str(&format!("  \"budget\": {},\n", fmt17(inst.budget)));
    out.push_str(&format!("  \"delta\": {}\n", fmt17(inst.delta)));
    out.push_str("}\n");
    fs::write(path, out).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Price sequence: one row per round, n comma-separated prices in (0,1].
/// Comment lines starting with '#' are skipped.
pub fn read_price_file(path: &Path, n: usize) -> Result<Vec<PriceVector>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| IoError::BadPrices {
            path: path.display().to_string(),
            line: idx + 1,
            message,
        };
        let vals: Vec<f64> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        if vals.len() != n {
            return Err(bad(format!("expected {} prices, got {}", n, vals.len())));
        }
        let p = PriceVector::new(vals).map_err(|e| bad(e.to_string()))?;
        rows.push(p);
    }
    Ok(rows)
}

/// 17 significant digits: lossless for f64 and byte-stable across runs.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(", ")
}

/// Minimal CSV accumulator with the versioned schema header.
pub struct CsvBuilder {
    text: String,
}

impl CsvBuilder {
    pub fn new(columns: &str) -> Self {
        let mut text = String::new();
        text.push_str(CSV_SCHEMA_HEADER);
        text.push('\n');
        text.push_str(columns);
        text.push('\n');
        CsvBuilder { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        fs::write(path, &self.text).map_err(|source| IoError::Write {
            path: path.display().to_string(),
            source,
        })
    }
}
