//! Membership-matrix CSV: header `node,pi_1,...,pi_K`, one row per node,
//! floats at full precision.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::{HarnessError, Result};

/// Write a membership matrix; `labels` (when given) name the nodes,
/// otherwise dense indices are used.
pub fn write_pi_csv(
    pi: &Array2<f64>,
    labels: Option<&[String]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let k = pi.ncols();
    let mut out = Vec::new();
    let header: Vec<String> = (1..=k).map(|j| format!("pi_{j}")).collect();
    writeln!(out, "node,{}", header.join(",")).expect("vec write");
    for (i, row) in pi.rows().into_iter().enumerate() {
        let name = match labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        };
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.15e}")).collect();
        writeln!(out, "{name},{}", cells.join(",")).expect("vec write");
    }
    std::fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a membership matrix written by [`write_pi_csv`] (labels are
/// returned alongside the values).
pub fn read_pi_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Array2<f64>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| HarnessError::Parse {
        path: display.clone(),
        line: 1,
        message: "empty file".into(),
    })?;
    let k = header.split(',').count().saturating_sub(1);
    if k == 0 {
        return Err(HarnessError::Parse {
            path: display,
            line: 1,
            message: "header must be node,pi_1,...,pi_K".into(),
        });
    }
    let mut labels = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != k + 1 {
            return Err(HarnessError::Parse {
                path: display,
                line: idx + 1,
                message: format!("expected {} cells, found {}", k + 1, cells.len()),
            });
        }
        labels.push(cells[0].to_string());
        for cell in &cells[1..] {
            let v: f64 = cell.trim().parse().map_err(|e| HarnessError::Parse {
                path: display.clone(),
                line: idx + 1,
                message: format!("bad float {cell:?}: {e}"),
            })?;
            values.push(v);
        }
    }
    let n = labels.len();
    let pi = Array2::from_shape_vec((n, k), values).map_err(|e| HarnessError::Parse {
        path: display,
        line: 0,
        message: e.to_string(),
    })?;
    Ok((labels, pi))
}
