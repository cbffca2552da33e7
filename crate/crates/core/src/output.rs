//! Machine-readable results: the JSON envelope and the CSV tables. Every
//! file is written once, through a temporary file renamed into place.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::io::write_atomic;
use crate::error::Result;
use crate::exact::DistributionCurve;
use crate::verify::{Check, EstimateRow};

pub const TOOL_VERSION: &str = concat!("meetwalk ", env!("CARGO_PKG_VERSION"));

/// Something a run produced: a file on disk, inline data, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl Artifact {
    pub fn inline(name: impl Into<String>, kind: &str, data: impl Serialize) -> Result<Self> {
        Ok(Artifact { name: name.into(), kind: kind.into(), path: None, data: Some(serde_json::to_value(data)?) })
    }

    pub fn file(name: impl Into<String>, kind: &str, path: &Path) -> Self {
        Artifact { name: name.into(), kind: kind.into(), path: Some(path.display().to_string()), data: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub tool_version: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Envelope {
    pub fn new(config: impl Serialize) -> Result<Self> {
        Ok(Envelope {
            tool_version: TOOL_VERSION.to_string(),
            config: serde_json::to_value(config)?,
            checks: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

fn csv_text<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `t,value,err_bound` rows.
pub fn curve_csv(curve: &DistributionCurve) -> Result<String> {
    csv_text(&["t", "value", "err_bound"], |w| {
        for (t, v) in curve.times.iter().zip(&curve.values) {
            w.write_record(&[t.to_string(), v.to_string(), curve.err_bound.to_string()])?;
        }
        Ok(())
    })
}

/// One row per estimate with its standard error and sample count.
pub fn estimates_csv(rows: &[EstimateRow]) -> Result<String> {
    csv_text(&["label", "value", "std_err", "n_samples", "method"], |w| {
        for r in rows {
            w.serialize((&r.label, r.value, r.std_err, r.n_samples, &r.method))?;
        }
        Ok(())
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}
