//! Output-by-output differences between two runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
    /// Outputs whose checksums differ.
    pub changed: Vec<OutputDiff>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputDiff {
    pub path: String,
    pub kind: DiffKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffKind {
    Numeric {
        values: usize,
        differing: usize,
        max_abs: f64,
        mean_abs: f64,
    },
    /// Row count, column count or a non-numeric cell changed.
    Shape { detail: String },
    /// Not a CSV table.
    Content,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.only_in_a.is_empty() && self.only_in_b.is_empty() && self.changed.is_empty()
    }

    /// Largest numeric difference over all CSV outputs.
    pub fn max_abs(&self) -> f64 {
        self.changed
            .iter()
            .filter_map(|d| match d.kind {
                DiffKind::Numeric { max_abs, .. } => Some(max_abs),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

fn read_table(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| CliError::io(path, e.into()))
        })
        .collect()
}

fn diff_tables(a: &[Vec<String>], b: &[Vec<String>]) -> DiffKind {
    if a.len() != b.len() {
        return DiffKind::Shape {
            detail: format!("{} vs {} rows", a.len(), b.len()),
        };
    }
    let (mut values, mut differing, mut max_abs, mut sum) = (0usize, 0usize, 0.0f64, 0.0f64);
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        if ra.len() != rb.len() {
            return DiffKind::Shape {
                detail: format!("row {i}: {} vs {} columns", ra.len(), rb.len()),
            };
        }
        for (ca, cb) in ra.iter().zip(rb) {
            match (ca.parse::<f64>(), cb.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    let d = (x - y).abs();
                    values += 1;
                    if d > 0.0 || x.is_nan() != y.is_nan() {
                        differing += 1;
                    }
                    if d.is_finite() {
                        max_abs = max_abs.max(d);
                        sum += d;
                    }
                }
                _ if ca == cb => {}
                _ => {
                    return DiffKind::Shape {
                        detail: format!("row {i}: `{ca}` vs `{cb}`"),
                    }
                }
            }
        }
    }
    DiffKind::Numeric {
        values,
        differing,
        max_abs,
        mean_abs: if values == 0 { 0.0 } else { sum / values as f64 },
    }
}

pub fn compare(a: &Path, b: &Path) -> Result<DiffReport> {
    let (ma, dir_a) = RunManifest::load(a)?;
    let (mb, dir_b) = RunManifest::load(b)?;
    let index = |m: &RunManifest| -> BTreeMap<String, String> {
        m.outputs.iter().map(|o| (o.path.clone(), o.sha256.clone())).collect()
    };
    let (ia, ib) = (index(&ma), index(&mb));
    let mut report = DiffReport {
        only_in_a: ia.keys().filter(|k| !ib.contains_key(*k)).cloned().collect(),
        only_in_b: ib.keys().filter(|k| !ia.contains_key(*k)).cloned().collect(),
        changed: Vec::new(),
    };
    for (path, sha) in &ia {
        let Some(other) = ib.get(path) else { continue };
        if sha == other {
            continue;
        }
        let kind = if path.ends_with(".csv") {
            diff_tables(&read_table(&dir_a.join(path))?, &read_table(&dir_b.join(path))?)
        } else {
            DiffKind::Content
        };
        report.changed.push(OutputDiff {
            path: path.clone(),
            kind,
        });
    }
    Ok(report)
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "no differences");
        }
        for p in &self.only_in_a {
            writeln!(f, "only in a: {p}")?;
        }
        for p in &self.only_in_b {
            writeln!(f, "only in b: {p}")?;
        }
        for d in &self.changed {
            match &d.kind {
                DiffKind::Numeric {
                    values,
                    differing,
                    max_abs,
                    mean_abs,
                } => writeln!(
                    f,
                    "{}: {differing}/{values} values differ, max |Δ| = {max_abs:.3e}, mean |Δ| = {mean_abs:.3e}",
                    d.path
                )?,
                DiffKind::Shape { detail } => writeln!(f, "{}: layout differs ({detail})", d.path)?,
                DiffKind::Content => writeln!(f, "{}: content differs", d.path)?,
            }
        }
        writeln!(f, "max |Δ| over all tables: {:.3e}", self.max_abs())
    }
}
