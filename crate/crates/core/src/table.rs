//! Feature table persistence.
//!
//! Tables are CSV with header `id,f1,...,f18` and an optional trailing
//! `label` column. Values are written in shortest round-trip form, so reading
//! a table back reproduces every `f64` bit for bit. The normalization bounds
//! and extraction configuration travel in a JSON manifest.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureVector, NormalizationBounds, FEATURE_DIM};

/// Feature rows with optional class labels (one per row when present).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub vectors: Vec<FeatureVector>,
    pub labels: Option<Vec<String>>,
}

impl FeatureTable {
    pub fn unlabeled(vectors: Vec<FeatureVector>) -> Self {
        Self {
            vectors,
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn header(labeled: bool) -> Vec<String> {
    let mut cols = vec!["id".to_string()];
    cols.extend((1..=FEATURE_DIM).map(|i| format!("f{i}")));
    if labeled {
        cols.push("label".into());
    }
    cols
}

pub fn write_csv<W: Write>(out: W, table: &FeatureTable) -> Result<()> {
    if let Some(labels) = &table.labels {
        if labels.len() != table.vectors.len() {
            return Err(Error::Table(format!(
                "{} labels for {} rows",
                labels.len(),
                table.vectors.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(table.labels.is_some()))?;
    for (row, v) in table.vectors.iter().enumerate() {
        let mut record = Vec::with_capacity(FEATURE_DIM + 2);
        record.push(v.id.clone());
        record.extend(v.values.iter().map(|x| format!("{x:?}")));
        if let Some(labels) = &table.labels {
            record.push(labels[row].clone());
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<FeatureTable> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let head: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let labeled = if head == header(false) {
        false
    } else if head == header(true) {
        true
    } else {
        return Err(Error::Table(format!(
            "expected header `id,f1,...,f{FEATURE_DIM}[,label]`, found `{}`",
            head.join(",")
        )));
    };

    let mut table = FeatureTable {
        vectors: Vec::new(),
        labels: labeled.then(Vec::new),
    };
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let mut values = [0.0f64; FEATURE_DIM];
        for (d, slot) in values.iter_mut().enumerate() {
            let field = record.get(d + 1).unwrap_or_default().trim();
            *slot = field.parse().map_err(|_| {
                Error::Table(format!(
                    "line {line}: f{} is not a number: {field:?}",
                    d + 1
                ))
            })?;
            if !slot.is_finite() {
                return Err(Error::Table(format!(
                    "line {line}: f{} is not finite",
                    d + 1
                )));
            }
        }
        table.vectors.push(FeatureVector::new(
            record.get(0).unwrap_or_default(),
            values,
        ));
        if let Some(labels) = table.labels.as_mut() {
            labels.push(record.get(FEATURE_DIM + 1).unwrap_or_default().to_string());
        }
    }
    Ok(table)
}

pub fn write_csv_file(path: impl AsRef<Path>, table: &FeatureTable) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(std::io::BufWriter::new(file), table)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file))
}

/// Extraction configuration and pool bounds stored alongside a feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub config: FeatureConfig,
    pub rows: usize,
    pub bounds: Option<NormalizationBounds>,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
