//! Sweep-result emission: CSV (always) and optional SVG charts.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::svg::{line_chart, Series};
use crate::sweep::SweepRow;
use crate::{HarnessError, Result};

/// Output formats for [`emit_results`]. CSV is always written; the list
/// controls the extras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

fn epsilon_text(eps: Option<f64>) -> String {
    match eps {
        Some(v) => format!("{v}"),
        None => "inf".into(),
    }
}

/// Render the sweep table as CSV text: `#`-prefixed metadata lines, the
/// fixed header, then one line per row in table order.
pub fn sweep_csv_text(rows: &[SweepRow], metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    for (key, value) in metadata {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out.push_str("b_n,epsilon,mean_loss,std_loss,reps,runtime_ms,warnings\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.9},{:.9},{},{:.3},{}\n",
            row.b_n,
            epsilon_text(row.epsilon),
            row.mean_loss,
            row.std_loss,
            row.reps,
            row.runtime_ms,
            row.warnings
        ));
    }
    out
}

/// Write `sweep.csv` (plus charts when requested) into `out_dir`; returns
/// the created paths.
pub fn emit_results(
    rows: &[SweepRow],
    out_dir: impl AsRef<Path>,
    formats: &[Format],
    metadata: &[(String, String)],
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(HarnessError::InvalidInput("empty result table".into()));
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut created = Vec::new();

    let csv_path = out_dir.join("sweep.csv");
    let mut file = std::fs::File::create(&csv_path).map_err(|source| HarnessError::Io {
        path: csv_path.display().to_string(),
        source,
    })?;
    file.write_all(sweep_csv_text(rows, metadata).as_bytes())
        .map_err(|source| HarnessError::Io {
            path: csv_path.display().to_string(),
            source,
        })?;
    created.push(csv_path);

    if formats.contains(&Format::Svg) {
        // one curve per epsilon: loss against b_n
        let mut eps_values: Vec<Option<f64>> = rows.iter().map(|r| r.epsilon).collect();
        eps_values.sort_by(|a, b| cmp_eps(*a, *b));
        eps_values.dedup();
        let by_eps: Vec<Series> = eps_values
            .iter()
            .map(|&eps| Series {
                label: format!("eps = {}", epsilon_text(eps)),
                points: rows
                    .iter()
                    .filter(|r| r.epsilon == eps && r.mean_loss.is_finite())
                    .map(|r| (r.b_n, r.mean_loss))
                    .collect(),
            })
            .collect();
        let bn_chart = out_dir.join("loss_vs_bn.svg");
        line_chart("mean loss vs degree scale", "b_n", "mean loss", &by_eps, &bn_chart)?;
        created.push(bn_chart);

        // one curve per b_n: loss against epsilon (non-private entries have
        // no finite x coordinate and are skipped)
        let mut bn_values: Vec<f64> = rows.iter().map(|r| r.b_n).collect();
        bn_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bn_values.dedup();
        let by_bn: Vec<Series> = bn_values
            .iter()
            .map(|&b_n| Series {
                label: format!("b_n = {b_n}"),
                points: rows
                    .iter()
                    .filter(|r| r.b_n == b_n && r.mean_loss.is_finite())
                    .filter_map(|r| r.epsilon.map(|e| (e, r.mean_loss)))
                    .collect(),
            })
            .collect();
        if by_bn.iter().any(|s| !s.points.is_empty()) {
            let eps_chart = out_dir.join("loss_vs_eps.svg");
            line_chart(
                "mean loss vs privacy budget",
                "epsilon",
                "mean loss",
                &by_bn,
                &eps_chart,
            )?;
            created.push(eps_chart);
        }
    }
    Ok(created)
}

fn cmp_eps(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (Some(_), None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
    }
}
