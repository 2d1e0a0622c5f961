//! CSV and report files of a run directory.
//!
//! Floats are written with 17 significant digits so that every value reads
//! back to the same `f64`.

use std::io::{self, Write};
use std::path::Path;

use crate::diagnostics::EnergyRecord;
use crate::dynamics::Snapshot;

pub const ENERGIES_FILE: &str = "energies.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFIG_FILE: &str = "config.ini";
pub const SNAPSHOTS_HEADER: &str = "t,x,u";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_energies(mut w: impl Write, records: &[EnergyRecord]) -> io::Result<()> {
    writeln!(w, "{}", EnergyRecord::CSV_HEADER)?;
    for r in records {
        let row: Vec<String> = r.columns().iter().map(|&v| fmt_float(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_snapshots(mut w: impl Write, snapshots: &[Snapshot]) -> io::Result<()> {
    writeln!(w, "{SNAPSHOTS_HEADER}")?;
    for s in snapshots {
        let t = fmt_float(s.t);
        for (x, u) in s.u.grid().points().iter().zip(s.u.values()) {
            writeln!(w, "{t},{},{}", fmt_float(*x), fmt_float(*u))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}: {message}")]
pub struct CsvError {
    pub file: String,
    pub message: String,
}

fn read_table(path: &Path, header: &str) -> Result<Vec<Vec<f64>>, CsvError> {
    let file = path.display().to_string();
    let fail = |message: String| CsvError {
        file: file.clone(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let found = reader.headers().map_err(|e| fail(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(fail(format!("expected header `{header}`, found `{found}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // line 1 is the header
        let line = i + 2;
        let record = record.map_err(|e| fail(format!("line {line}: {e}")))?;
        if record.len() != width {
            return Err(fail(format!("line {line}: expected {width} fields, found {}", record.len())));
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| fail(format!("line {line}: `{field}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_energies(path: &Path) -> Result<Vec<EnergyRecord>, CsvError> {
    Ok(read_table(path, EnergyRecord::CSV_HEADER)?
        .into_iter()
        .map(|c| EnergyRecord {
            t: c[0],
            mass: c[1],
            l2u: c[2],
            l2ux: c[3],
            l2uxx: c[4],
            e0: c[5],
            l2ut: c[6],
            l2uxt: c[7],
            l2uxxt: c[8],
            e1: c[9],
        })
        .collect())
}

/// `(min u, max u)` over every row of a snapshots file.
pub fn read_snapshot_range(path: &Path) -> Result<(f64, f64), CsvError> {
    let rows = read_table(path, SNAPSHOTS_HEADER)?;
    if rows.is_empty() {
        return Err(CsvError {
            file: path.display().to_string(),
            message: "no snapshot rows".into(),
        });
    }
    Ok(rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[2]), hi.max(r[2]))))
}
