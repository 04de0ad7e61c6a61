//! Versioned report files: a JSON envelope around any serializable result, plus CSV tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::curvature::CurvatureReport;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::manifold::ModelManifold;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Precondition(format!("unknown format '{s}' (json | csv)"))),
        }
    }
}

/// What a run was computed from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDigest {
    pub manifold: String,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<TorusGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl InputDigest {
    pub fn of(man: &ModelManifold) -> InputDigest {
        InputDigest {
            manifold: man.name.clone(),
            n: man.n,
            params: man.params.clone(),
            grid: None,
            seed: None,
            points: None,
            tol: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDigest,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: impl Into<String>, input: InputDigest, result: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.into(), input, result }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(format!("serialization: {e}")))
    }
}

/// One row per point and `t`: scalars, torsion norms and class residuals.
pub fn curvature_csv(rows: &[CurvatureReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = rows.first().map_or(0, |r| r.point.coords.len());
    let mut header: Vec<String> = vec![];
    for k in 1..=n {
        header.push(format!("re_z{k}"));
        header.push(format!("im_z{k}"));
    }
    header.extend(
        ["t", "s1", "s2", "kahler", "balanced", "gauduchon", "pluriclosed"].iter().map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = r.point.coords.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        rec.push(r.t.to_string());
        rec.push(r.s1.to_string());
        rec.push(r.s2.to_string());
        rec.extend(r.class_residuals.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Consistency(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Consistency(format!("csv: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Consistency(format!("csv: {e}"))
}

/// Write to `path`, or stdout for `-`.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        println!("{text}");
        return Ok(());
    }
    std::fs::write(path, text)?;
    Ok(())
}
