//! On-disk formats written by the pipeline, each with a matching reader.
//!
//! CSV tables are plot-ready; JSON documents carry a `schema_version`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::SlopeProcessModel;

pub const SCHEMA_VERSION: u32 = 1;

/// One row of `spectrum.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub segment: usize,
    pub j: usize,
    #[serde(rename = "N_j")]
    pub n_j: usize,
    #[serde(rename = "S_j")]
    pub s_j: f64,
    #[serde(rename = "log2_S_j")]
    pub log2_s_j: f64,
}

/// One row of `hurst.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstRow {
    pub segment: usize,
    pub start: usize,
    #[serde(rename = "H_raw")]
    pub h_raw: f64,
    #[serde(rename = "H_filtered")]
    pub h_filtered: Option<f64>,
}

/// One row of `compare.csv`: a segment at one of several segment lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub segment_length: usize,
    pub segment: usize,
    pub start: usize,
    #[serde(rename = "H_raw")]
    pub h_raw: f64,
    #[serde(rename = "H_filtered")]
    pub h_filtered: Option<f64>,
}

/// One row of a sampled path, `path.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub index: usize,
    pub value: f64,
}

/// One row of a synthetic price file in the ingestion format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub timestamp: i64,
    pub price: f64,
}

/// JSON record for one segment estimate; failed segments carry `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_index: usize,
    pub start: usize,
    pub length: usize,
    pub c: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "H")]
    pub hurst: Option<f64>,
    #[serde(rename = "var_H")]
    pub var_h: Option<f64>,
    pub scales_used: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentsDocument {
    pub schema_version: u32,
    pub segment_length: usize,
    pub segments: Vec<SegmentRecord>,
}

/// Variogram and fitted slope-process model for one segment length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramEntry {
    pub segment_length: usize,
    pub segment_count: usize,
    pub lags: Vec<usize>,
    pub variogram: Vec<f64>,
    pub model: SlopeProcessModel,
    #[serde(rename = "std_H_raw")]
    pub std_raw: f64,
    #[serde(rename = "std_H_filtered")]
    pub std_filtered: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramDocument {
    pub schema_version: u32,
    pub entries: Vec<VariogramEntry>,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}

/// Read any versioned document, rejecting unknown schema versions.
pub fn read_versioned<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let value: serde_json::Value = read_json(path)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(serde_json::from_value(value)?),
        Some(v) => Err(Error::Input(format!(
            "{}: unsupported schema version {v}",
            path.display()
        ))),
        None => Err(Error::Input(format!(
            "{}: missing schema_version",
            path.display()
        ))),
    }
}
