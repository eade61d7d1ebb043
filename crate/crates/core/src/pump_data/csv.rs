//! CSV persistence for pump samples.
//!
//! Fixed seven-column schema with the exact header
//! `tin_K,pin_bar,n_rpm,dp_bar,power_kW,qin,sd_pct`, decimal points, UTF-8
//! and LF line endings. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces every field bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pump_data::PumpSample;

/// Column names in file order.
pub const CSV_COLUMNS: [&str; 7] = [
    "tin_K", "pin_bar", "n_rpm", "dp_bar", "power_kW", "qin", "sd_pct",
];

/// The exact header line.
pub const CSV_HEADER: &str = "tin_K,pin_bar,n_rpm,dp_bar,power_kW,qin,sd_pct";

fn fields(sample: &PumpSample) -> [f64; 7] {
    [
        sample.tin,
        sample.pin,
        sample.n_speed,
        sample.delta_p,
        sample.power,
        sample.qin,
        sample.sd,
    ]
}

/// Writes `samples` to `path`, creating or truncating the file.
pub fn save_csv(samples: &[PumpSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(32 + samples.len() * 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for sample in samples {
        let f = fields(sample);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f[0], f[1], f[2], f[3], f[4], f[5], f[6]
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a pump-sample CSV. A header-only file yields an empty list; blank
/// lines are skipped. Parse errors carry 1-based line numbers (the header is
/// line 1) and name the offending column.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<PumpSample>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_csv(&content)
}

fn parse_csv(content: &str) -> Result<Vec<PumpSample>> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvParse {
        line: 1,
        message: "file is empty, expected a header line".into(),
    })?;
    if header != CSV_HEADER {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("expected header '{CSV_HEADER}', found '{header}'"),
        });
    }

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != CSV_COLUMNS.len() {
            return Err(Error::CsvParse {
                line: line_no,
                message: format!(
                    "expected {} columns, found {}",
                    CSV_COLUMNS.len(),
                    cells.len()
                ),
            });
        }
        let mut values = [0.0_f64; 7];
        for (k, cell) in cells.iter().enumerate() {
            values[k] = cell.trim().parse().map_err(|_| Error::CsvParse {
                line: line_no,
                message: format!("column {}: invalid float '{}'", CSV_COLUMNS[k], cell),
            })?;
        }
        samples.push(PumpSample {
            tin: values[0],
            pin: values[1],
            n_speed: values[2],
            delta_p: values[3],
            power: values[4],
            qin: values[5],
            sd: values[6],
        });
    }
    Ok(samples)
}
