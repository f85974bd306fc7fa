//! CSV tables and gnuplot data files.

use std::io::Write;
use std::path::Path;

use bvlab::diagnostics::{cumulative_dissipation, DiagnosticsRecord};

use crate::error::CliError;

pub const DIAGNOSTICS_COLUMNS: &[&str] = &[
    "step",
    "t",
    "dt",
    "energy",
    "drag_dissipation",
    "viscous_dissipation",
    "cumulative_dissipation",
    "mass",
    "momentum",
    "boundary_mass_indicator",
    "u4_window",
];

/// Shortest text that reads back to the same f64.
pub fn real(v: f64) -> String {
    format!("{v:e}")
}

/// Writes a table with a header row. Rows must match the header length.
pub fn write_csv(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn diagnostics_rows(records: &[DiagnosticsRecord]) -> Vec<Vec<String>> {
    let cum = cumulative_dissipation(records);
    records
        .iter()
        .zip(cum)
        .map(|(r, c)| {
            vec![
                r.step.to_string(),
                real(r.t),
                real(r.dt),
                real(r.energy),
                real(r.drag_dissipation),
                real(r.viscous_dissipation),
                real(c),
                real(r.mass),
                real(r.momentum),
                real(r.boundary_mass_indicator),
                real(r.u4_window),
            ]
        })
        .collect()
}

pub fn write_diagnostics(w: &mut dyn Write, records: &[DiagnosticsRecord]) -> Result<(), csv::Error> {
    write_csv(w, DIAGNOSTICS_COLUMNS, &diagnostics_rows(records))
}

pub fn save_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

/// A numeric CSV read back by column name.
#[derive(Clone, Debug)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Reads a CSV whose every field is a number (`nan` allowed).
pub fn load_numeric_csv(path: &Path, required: &[&str]) -> Result<NumericTable, CliError> {
    let malformed = |reason: String| CliError::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let mut rd = csv::Reader::from_path(path).map_err(|e| malformed(e.to_string()))?;
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| malformed(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    for name in required {
        if !header.iter().any(|h| h == name) {
            return Err(malformed(format!("missing column `{name}`")));
        }
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| malformed(format!("row {}: non-numeric field", k + 2)))?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

/// Whitespace-separated columns with a `#` header line.
pub fn save_dat(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
    let n = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    let mut text = format!("# {}\n", header.join(" "));
    for i in 0..n {
        let line: Vec<String> = columns.iter().map(|c| real(c[i])).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            assert_eq!(real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn numeric_table_by_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        save_csv(
            &p,
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "nan".into()]],
        )
        .unwrap();
        let t = load_numeric_csv(&p, &["b"]).unwrap();
        assert_eq!(t.column("a").unwrap(), vec![1.0, 3.0]);
        assert!(t.column("b").unwrap()[1].is_nan());
        assert!(load_numeric_csv(&p, &["c"]).is_err());
    }
}
