//! Plain-text snapshots of (u, f).
//!
//! ```text
//! BVLAB1 nx nv x_min x_max v_min v_max u_minus u_plus epsilon t
//! u_0 ... u_{nx-1}
//! f_{0,0} ... f_{0,nv-1}
//! ...
//! f_{nx-1,0} ... f_{nx-1,nv-1}
//! ```
//!
//! Reals are written with 17 significant digits, so a write/read cycle
//! reproduces every bit.

use std::io::{BufRead, Write};
use std::path::Path;

use bvlab::{FluidField, KineticField, PhaseGrid};
use thiserror::Error;

use crate::error::CliError;

const MAGIC: &str = "BVLAB1";

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub grid: PhaseGrid,
    pub epsilon: f64,
    pub t: f64,
    pub u: FluidField,
    pub f: KineticField,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Parse {
        line,
        message: message.into(),
    }
}

fn write_row(w: &mut dyn Write, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}

pub fn write_snapshot(
    w: &mut dyn Write,
    grid: &PhaseGrid,
    epsilon: f64,
    t: f64,
    u: &FluidField,
    f: &KineticField,
) -> std::io::Result<()> {
    write!(w, "{MAGIC} {} {} ", grid.nx, grid.nv)?;
    write_row(
        w,
        &[
            grid.x_min, grid.x_max, grid.v_min, grid.v_max, u.u_minus, u.u_plus, epsilon, t,
        ],
    )?;
    write_row(w, &u.u)?;
    for i in 0..f.nx {
        write_row(w, f.row(i))?;
    }
    Ok(())
}

fn parse_reals(text: &str, line: usize, expect: usize) -> Result<Vec<f64>, SnapshotError> {
    let values = text
        .split_ascii_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| parse_err(line, format!("not a number: `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expect {
        return Err(parse_err(
            line,
            format!("expected {expect} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn read_snapshot(r: &mut dyn BufRead) -> Result<SnapshotFile, SnapshotError> {
    let mut lines = r.lines();
    let mut next = |n: usize| -> Result<String, SnapshotError> {
        lines
            .next()
            .ok_or_else(|| parse_err(n, "unexpected end of file"))?
            .map_err(Into::into)
    };
    let header = next(1)?;
    let mut parts = header.split_ascii_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(parse_err(1, format!("missing `{MAGIC}` header")));
    }
    let mut count = || -> Result<usize, SnapshotError> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "bad grid size"))
    };
    let (nx, nv) = (count()?, count()?);
    let rest: Vec<&str> = header.split_ascii_whitespace().skip(3).collect();
    let h = parse_reals(&rest.join(" "), 1, 8)?;
    let grid = PhaseGrid::new(h[0], h[1], nx, h[2], h[3], nv).map_err(|e| parse_err(1, e.to_string()))?;
    let u = FluidField::new(parse_reals(&next(2)?, 2, nx)?, h[4], h[5]);
    let mut data = Vec::with_capacity(nx * nv);
    for i in 0..nx {
        data.extend(parse_reals(&next(3 + i)?, 3 + i, nv)?);
    }
    Ok(SnapshotFile {
        grid,
        epsilon: h[6],
        t: h[7],
        u,
        f: KineticField { nx, nv, data },
    })
}

pub fn save_snapshot(
    path: &Path,
    grid: &PhaseGrid,
    epsilon: f64,
    t: f64,
    u: &FluidField,
    f: &KineticField,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, grid, epsilon, t, u, f).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<SnapshotFile, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_snapshot(&mut std::io::BufReader::new(file)).map_err(|e| CliError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_layout() {
        let g = PhaseGrid::new(-1.0, 1.0, 4, -0.5, 0.5, 4).unwrap();
        let u = FluidField::new(vec![0.25, -1.0, 0.5, 0.0], 1.0, 0.0);
        let f = KineticField {
            nx: 4,
            nv: 4,
            data: (0..16).map(f64::from).collect(),
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, 0.05, 0.5, &u, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("BVLAB1 4 4 -1.0000000000000000e0"));
        assert_eq!(lines[1].split(' ').count(), 4);
        assert_eq!(lines[5].split(' ').count(), 4);
    }

    #[test]
    fn short_file_is_rejected_with_line() {
        let text = "BVLAB1 4 4 -1 1 -1 1 0 0 0.1 0\n1 2 3 4\n0 0 0 0\n0 0 0 0\n";
        let err = read_snapshot(&mut text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 5"), "{err}");
    }
}
