//! Structured experiment records and their CSV/JSON serialization.
//!
//! Missing or undefined cells (a slope through zeros, a 0/0 ratio) are
//! `None`: empty in CSV, `null` in JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    /// `columns` are `(name, unit)` pairs; use `"1"` for dimensionless values.
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(
            self.columns
                .iter()
                .map(|c| format!("{} ({})", c.name, c.unit)),
        )?;
        for row in &self.rows {
            out.write_record(
                row.iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

impl Fitted {
    pub fn exact(value: f64) -> Self {
        Self {
            value: Some(value),
            stderr: None,
        }
    }

    pub fn undefined() -> Self {
        Self {
            value: None,
            stderr: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: Option<u64>,
    pub grid: Grid,
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config_echo: serde_json::Value,
    pub measurements: Vec<Table>,
    pub fitted: BTreeMap<String, Fitted>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(command: &str, grid: &Grid) -> Self {
        Self {
            command: command.to_string(),
            config_echo: serde_json::Value::Null,
            measurements: Vec::new(),
            fitted: BTreeMap::new(),
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: None,
                grid: *grid,
                timestamp_unix: 0,
            },
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.measurements.iter().find(|t| t.name == name)
    }

    pub fn fitted_value(&self, name: &str) -> Option<f64> {
        self.fitted.get(name).and_then(|f| f.value)
    }

    /// Location of the first NaN or infinity in tables or fitted values.
    pub fn first_non_finite(&self) -> Option<String> {
        for t in &self.measurements {
            for (r, row) in t.rows.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    if let Some(x) = v {
                        if !x.is_finite() {
                            return Some(format!("{}[{r}].{} = {x}", t.name, t.columns[c].name));
                        }
                    }
                }
            }
        }
        for (k, f) in &self.fitted {
            for x in [f.value, f.stderr].into_iter().flatten() {
                if !x.is_finite() {
                    return Some(format!("fitted {k} = {x}"));
                }
            }
        }
        None
    }

    /// Writes `report.json` and one `<table>.csv` per measurement table.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        for t in &self.measurements {
            t.write_csv(fs::File::create(dir.join(format!("{}.csv", t.name)))?)?;
        }
        Ok(())
    }
}

/// Least-squares line through `(x, y)`: returns `(slope, stderr of slope)`.
/// The standard error needs at least three points.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, Option<f64>)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let stderr = (n > 2).then(|| {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    });
    Some((slope, stderr))
}

/// Slope of `log|y|` against `log x`; undefined if any `y` vanishes.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Fitted {
    if x.iter().any(|&a| a <= 0.0) || y.iter().any(|&b| b == 0.0 || !b.is_finite()) {
        return Fitted::undefined();
    }
    let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|b| b.abs().ln()).collect();
    match linear_fit(&lx, &ly) {
        Some((slope, stderr)) => Fitted {
            value: Some(slope),
            stderr,
        },
        None => Fitted::undefined(),
    }
}
