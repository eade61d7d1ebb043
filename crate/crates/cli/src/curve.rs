//! Learning-curve CSV files: one row per iteration, exact header
//! `iteration,train_size,rmse,r2,mape_pct,max_error,acceptance_pct,mean_pool_variance`.
//!
//! Floats are written in shortest round-trip form, so rewriting the same
//! campaign produces byte-identical files.

use std::fs;
use std::path::Path;

use surge_al_core::active_learning::LearningCurve;

use crate::{runtime, CliError, CliResult};

pub const CURVE_HEADER: &str =
    "iteration,train_size,rmse,r2,mape_pct,max_error,acceptance_pct,mean_pool_variance";

/// One parsed curve row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub iteration: usize,
    pub train_size: usize,
    pub rmse: f64,
    pub r2: f64,
    pub mape_pct: f64,
    pub max_error: f64,
    pub acceptance_pct: f64,
    pub mean_pool_variance: f64,
}

pub fn write_curve(curve: &LearningCurve, path: &Path) -> CliResult<()> {
    let mut out = String::with_capacity(64 + curve.records.len() * 96);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for r in &curve.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.iteration,
            r.train_size,
            r.test_rmse,
            r.test_r2,
            r.test_mape,
            r.test_max_error,
            r.acceptance_accuracy,
            r.mean_pool_variance
        ));
    }
    fs::write(path, out).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn read_curve(path: &Path) -> CliResult<Vec<CurveRow>> {
    let text = fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read curve {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, message: String| -> CliError {
        runtime(format!("{}:{line}: {message}", path.display()))
    };
    match lines.next() {
        Some((_, header)) if header == CURVE_HEADER => {}
        Some((_, header)) => {
            return Err(bad(
                1,
                format!("expected header '{CURVE_HEADER}', found '{header}'"),
            ))
        }
        None => return Err(bad(1, "file is empty".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            return Err(bad(
                idx + 1,
                format!("expected 8 columns, found {}", cells.len()),
            ));
        }
        let float = |k: usize| -> CliResult<f64> {
            cells[k].parse().map_err(|_| {
                bad(
                    idx + 1,
                    format!("invalid float '{}' in column {k}", cells[k]),
                )
            })
        };
        rows.push(CurveRow {
            iteration: cells[0]
                .parse()
                .map_err(|_| bad(idx + 1, format!("invalid iteration '{}'", cells[0])))?,
            train_size: cells[1]
                .parse()
                .map_err(|_| bad(idx + 1, format!("invalid train_size '{}'", cells[1])))?,
            rmse: float(2)?,
            r2: float(3)?,
            mape_pct: float(4)?,
            max_error: float(5)?,
            acceptance_pct: float(6)?,
            mean_pool_variance: float(7)?,
        });
    }
    Ok(rows)
}
