//! Snapshot files: one JSON header line, then raw little-endian `f64` pairs `(re, im)`
//! in row-major order. Conservation logs are CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

use super::flow::Trajectory;
use super::grid::{Grid, GridField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub time: f64,
    pub params: serde_json::Value,
}

pub fn write_snapshot(path: &Path, u: &GridField, time: f64, params: serde_json::Value) -> Result<(), SimError> {
    let header = SnapshotHeader { d: u.grid.d, n: u.grid.n, l: u.grid.l, time, params };
    let mut out = BufWriter::new(File::create(path)?);
    let line = serde_json::to_string(&header).map_err(|e| SimError::Io(e.to_string()))?;
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    for v in &u.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, GridField), SimError> {
    let mut input = BufReader::new(File::open(path)?);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).map_err(|e| SimError::Io(format!("bad header: {e}")))?;
    let grid = Grid::new(header.d, header.n, header.l)?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 16 {
        return Err(SimError::Io(format!("expected {} payload bytes, found {}", grid.len() * 16, bytes.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let values = bytes.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok((header, GridField::new(grid, values)?))
}

/// CSV with columns `time,mass,energy,Hs_norm`.
pub fn write_log(path: &Path, traj: &Trajectory) -> Result<(), SimError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "time,mass,energy,Hs_norm")?;
    for i in 0..traj.times.len() {
        writeln!(out, "{:e},{:e},{:e},{:e}", traj.times[i], traj.mass_log[i], traj.energy_log[i], traj.hs_log[i])?;
    }
    out.flush()?;
    Ok(())
}
