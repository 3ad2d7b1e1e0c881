//! CSV tables and JSON summaries.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::io::Write;
use std::path::Path;

use orbitkit::geometry::{point, Point};
use orbitkit::prospector::OrbitRecord;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Validation(format!("csv: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Validation(format!("csv: {e}")))
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(format!("json: {e}")))?;
    text.push('\n');
    emit(text.as_bytes(), path)
}

pub const ORBIT_HEADER: [&str; 8] = ["orbit", "q", "p", "idx", "x", "y", "r", "residual"];

/// One row per orbit point.
pub fn orbit_table(orbits: &[OrbitRecord], z0: Point) -> Table {
    let mut t = Table::new(&ORBIT_HEADER);
    for (id, o) in orbits.iter().enumerate() {
        for (idx, z) in o.points.iter().enumerate() {
            t.push(vec![
                id.to_string(),
                o.q.to_string(),
                o.p.to_string(),
                idx.to_string(),
                num(z.x),
                num(z.y),
                num((z - z0).norm()),
                num(o.residual),
            ]);
        }
    }
    t
}

#[derive(Debug, Deserialize)]
struct OrbitRow {
    orbit: usize,
    q: usize,
    p: i64,
    idx: usize,
    x: f64,
    y: f64,
    #[allow(dead_code)]
    r: f64,
    residual: f64,
}

/// An orbit read back from a table.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredOrbit {
    pub id: usize,
    pub p: i64,
    pub q: usize,
    pub points: Vec<Point>,
    pub residual: f64,
}

pub fn read_orbit_table(path: &Path) -> Result<Vec<StoredOrbit>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Validation(format!("{}: {other:?}", path.display())),
    })?;
    let mut out: Vec<StoredOrbit> = Vec::new();
    for row in reader.deserialize::<OrbitRow>() {
        let row = row.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        match out.last_mut() {
            Some(o) if o.id == row.orbit => {
                if row.idx != o.points.len() || row.q != o.q || row.p != o.p {
                    return Err(CliError::Validation(format!(
                        "orbit {} rows are inconsistent at idx {}",
                        row.orbit, row.idx
                    )));
                }
                o.points.push(point(row.x, row.y));
            }
            _ => {
                if row.idx != 0 {
                    return Err(CliError::Validation(format!(
                        "orbit {} does not start at idx 0",
                        row.orbit
                    )));
                }
                out.push(StoredOrbit {
                    id: row.orbit,
                    p: row.p,
                    q: row.q,
                    points: vec![point(row.x, row.y)],
                    residual: row.residual,
                });
            }
        }
    }
    if let Some(o) = out.iter().find(|o| o.points.len() != o.q) {
        return Err(CliError::Validation(format!(
            "orbit {} has {} points, expected {}",
            o.id,
            o.points.len(),
            o.q
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
