//! Point-cloud ingestion from CSV or JSON.
//!
//! CSV rows are `x1,...,xD[,weight]`. A first row that is not entirely
//! numeric is a header; a header column named `weight` holds weights.
//! Without a header, the last column is a weight column only when the
//! caller asks for it. Blank lines and lines starting with `#` are skipped.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gcnlab_core::DiscreteMeasure;
use serde_json::Value;

/// Weights whose sum differs from 1 by more than this are renormalized
/// with a warning.
pub const WEIGHT_WARN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub measure: DiscreteMeasure,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn ingest(path: &Path, weighted: bool) -> Result<Ingested> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = match Format::from_path(path) {
        Format::Csv => parse_csv(&text, weighted),
        Format::Json => parse_json(&text),
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

fn parse_field(s: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| anyhow!("line {line}, column {}: '{s}' is not a number", col + 1))?;
    if !v.is_finite() {
        bail!("line {line}, column {}: non-finite value '{s}'", col + 1);
    }
    Ok(v)
}

pub fn parse_csv(text: &str, weighted: bool) -> Result<Ingested> {
    let rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split(',').map(str::trim).collect()))
        .collect();
    let Some((_, first)) = rows.first() else {
        bail!("no data rows");
    };
    let header = first.iter().any(|f| f.parse::<f64>().is_err());
    let (weight_col, body) = if header {
        let col = first.iter().position(|f| f.eq_ignore_ascii_case("weight"));
        (col, &rows[1..])
    } else {
        (weighted.then(|| first.len().saturating_sub(1)), &rows[..])
    };
    if body.is_empty() {
        bail!("no data rows after the header");
    }
    let width = if header { first.len() } else { body[0].1.len() };
    if width == 0 || (weight_col.is_some() && width < 2) {
        bail!("rows need at least one coordinate column");
    }

    let mut atoms = Vec::with_capacity(body.len());
    let mut weights = Vec::with_capacity(body.len());
    for (line, fields) in body {
        if fields.len() != width {
            bail!(
                "line {line}: expected {width} fields, found {}",
                fields.len()
            );
        }
        let mut point = Vec::with_capacity(width);
        for (col, f) in fields.iter().enumerate() {
            let v = parse_field(f, *line, col)?;
            if Some(col) == weight_col {
                if v <= 0.0 {
                    bail!("line {line}: weight must be positive, got {v}");
                }
                weights.push(v);
            } else {
                point.push(v);
            }
        }
        atoms.push(point);
    }
    build(atoms, weight_col.map(|_| weights))
}

pub fn parse_json(text: &str) -> Result<Ingested> {
    let doc: Value = serde_json::from_str(text).context("invalid JSON")?;
    let points = doc
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("expected an object with a \"points\" array"))?;
    let mut atoms = Vec::with_capacity(points.len());
    for (i, row) in points.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| anyhow!("points[{i}] is not an array"))?;
        let p = row
            .iter()
            .map(|v| v.as_f64().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| anyhow!("points[{i}] holds a non-numeric or non-finite value"))?;
        if let Some(first) = atoms.first().map(Vec::len) {
            if p.len() != first {
                bail!("points[{i}] has {} coordinates, expected {first}", p.len());
            }
        }
        atoms.push(p);
    }
    let weights = match doc.get("weights") {
        None | Some(Value::Null) => None,
        Some(w) => {
            let w = w
                .as_array()
                .ok_or_else(|| anyhow!("\"weights\" is not an array"))?;
            if w.len() != atoms.len() {
                bail!("{} weights for {} points", w.len(), atoms.len());
            }
            let mut out = Vec::with_capacity(w.len());
            for (i, v) in w.iter().enumerate() {
                match v.as_f64() {
                    Some(x) if x.is_finite() && x > 0.0 => out.push(x),
                    _ => bail!("weights[{i}] must be a positive finite number"),
                }
            }
            Some(out)
        }
    };
    build(atoms, weights)
}

fn build(atoms: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Ingested> {
    if atoms.is_empty() {
        bail!("no points");
    }
    if atoms[0].is_empty() {
        bail!("points have no coordinates");
    }
    let mut warnings = Vec::new();
    let measure = match weights {
        None => DiscreteMeasure::uniform(atoms)?,
        Some(w) => {
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > WEIGHT_WARN_TOL {
                warnings.push(format!("weights sum to {total}; renormalized to 1"));
            }
            DiscreteMeasure::normalized(atoms, w)?
        }
    };
    Ok(Ingested { measure, warnings })
}
