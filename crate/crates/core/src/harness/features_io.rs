//! CSV feature tables plus JSON sidecars recording extraction parameters.
//! Long form for the per-row and per-channel cues, wide form for the
//! 17-dimensional recompression features.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cue_rd::{RD_DIM, RD_FEATURE_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColorFeatureRow {
    pub entry_id: String,
    pub center_channel: String,
    pub row_index: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdFeatureRow {
    pub entry_id: String,
    pub codec_id: String,
    pub strength: f64,
    pub values: [f64; RD_DIM],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuantFeatureRow {
    pub entry_id: String,
    pub mode: String,
    pub channel_index: usize,
    pub phi: f64,
}

pub fn write_color_csv(path: &Path, rows: &[ColorFeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

pub fn read_color_csv(path: &Path) -> Result<Vec<ColorFeatureRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect::<csv::Result<Vec<_>>>().map_err(Error::Csv)
}

pub fn write_quant_csv(path: &Path, rows: &[QuantFeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

pub fn read_quant_csv(path: &Path) -> Result<Vec<QuantFeatureRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect::<csv::Result<Vec<_>>>().map_err(Error::Csv)
}

pub fn write_rd_csv(path: &Path, rows: &[RdFeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["entry_id", "codec_id", "strength"];
    header.extend_from_slice(&RD_FEATURE_NAMES);
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.entry_id.clone(),
            row.codec_id.clone(),
            row.strength.to_string(),
        ];
        record.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

pub fn read_rd_csv(path: &Path) -> Result<Vec<RdFeatureRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let expected = 3 + RD_DIM;
    if header.len() != expected {
        return Err(Error::Manifest(format!(
            "rd feature table has {} columns, expected {expected}",
            header.len()
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::Manifest(format!("bad number {:?} in rd table", &record[i])))
        };
        let mut values = [0.0f64; RD_DIM];
        for (k, v) in values.iter_mut().enumerate() {
            *v = parse(3 + k)?;
        }
        rows.push(RdFeatureRow {
            entry_id: record[0].to_string(),
            codec_id: record[1].to_string(),
            strength: parse(2)?,
            values,
        });
    }
    Ok(rows)
}

/// Group long-form color rows into one vector per entry, ordered by row
/// index, keeping only the requested center channel.
pub fn color_vectors(rows: &[ColorFeatureRow], center: &str) -> BTreeMap<String, Vec<f64>> {
    let mut grouped: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.center_channel == center) {
        grouped
            .entry(r.entry_id.clone())
            .or_default()
            .push((r.row_index, r.rho));
    }
    grouped
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|(i, _)| *i);
            (k, v.into_iter().map(|(_, rho)| rho).collect())
        })
        .collect()
}

/// Group long-form quant rows into one vector per entry, ordered by channel.
pub fn quant_vectors(rows: &[QuantFeatureRow], mode: &str) -> BTreeMap<String, Vec<f64>> {
    let mut grouped: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.mode == mode) {
        grouped
            .entry(r.entry_id.clone())
            .or_default()
            .push((r.channel_index, r.phi));
    }
    grouped
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|(i, _)| *i);
            (k, v.into_iter().map(|(_, phi)| phi).collect())
        })
        .collect()
}

pub fn rd_vectors(rows: &[RdFeatureRow]) -> BTreeMap<String, Vec<f64>> {
    rows.iter()
        .map(|r| (r.entry_id.clone(), r.values.to_vec()))
        .collect()
}

/// Extraction provenance written next to each feature table.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureSidecar {
    pub cue: String,
    pub tool_version: String,
    pub seed: u64,
    pub params: serde_json::Value,
}

impl FeatureSidecar {
    pub fn new(cue: &str, seed: u64, params: serde_json::Value) -> Self {
        FeatureSidecar {
            cue: cue.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            params,
        }
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "features".into());
    name.push_str(".meta.json");
    csv_path.with_file_name(name)
}

pub fn write_sidecar(csv_path: &Path, sidecar: &FeatureSidecar) -> Result<()> {
    let json = serde_json::to_string_pretty(sidecar)?;
    std::fs::write(sidecar_path(csv_path), json)?;
    Ok(())
}

pub fn read_sidecar(csv_path: &Path) -> Result<FeatureSidecar> {
    let bytes = std::fs::read(sidecar_path(csv_path))?;
    serde_json::from_slice(&bytes).map_err(Error::Json)
}
