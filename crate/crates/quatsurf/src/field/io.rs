//! CSV and binary interchange for fields.
//!
//! CSV rows are `re,im,w,x,y,z`, one per included node. The binary dump is
//! `b"QSF1"`, a little-endian `u32` version, the grid spec as length-prefixed
//! JSON, `nx` and `ny` as `u64`, then `4·nx·ny` row-major `f64` values with
//! NaN at excluded nodes.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{nan_q, ChartGrid, FieldError, GridSpec, QField};
use crate::Q;

const MAGIC: &[u8; 4] = b"QSF1";
const VERSION: u32 = 1;

pub fn write_csv<W: Write>(f: &QField, out: W) -> Result<(), FieldError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| FieldError::Io(e.to_string());
    w.write_record(["re", "im", "w", "x", "y", "z"]).map_err(err)?;
    for i in f.included() {
        let z = f.grid.node(i);
        let q = f.values[i];
        w.serialize((z.re, z.im, q.w, q.x, q.y, q.z)).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`] onto `grid`; every row must sit on a
/// lattice node.
pub fn read_csv<R: Read>(grid: &Arc<ChartGrid>, input: R) -> Result<QField, FieldError> {
    let mut r = csv::Reader::from_reader(input);
    let mut values = vec![nan_q(); grid.len()];
    for rec in r.deserialize::<(f64, f64, f64, f64, f64, f64)>() {
        let (re, im, w, x, y, z) = rec.map_err(|e| FieldError::Format(e.to_string()))?;
        let p = C64::new(re, im);
        let idx = grid
            .nearest(p)
            .filter(|&i| (grid.node(i) - p).norm() < 1e-6 * grid.h)
            .ok_or_else(|| FieldError::Format(format!("row at {p} is not a lattice node")))?;
        values[idx] = Q::new(w, x, y, z);
    }
    Ok(QField::from_values(grid, values))
}

pub fn write_binary<W: Write>(f: &QField, mut out: W) -> Result<(), FieldError> {
    let spec = serde_json::to_vec(&f.grid.spec()).map_err(|e| FieldError::Format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(spec.len() as u32).to_le_bytes())?;
    out.write_all(&spec)?;
    out.write_all(&(f.grid.nx as u64).to_le_bytes())?;
    out.write_all(&(f.grid.ny as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(32 * f.len());
    for i in 0..f.len() {
        let q = if f.mask[i] { f.values[i] } else { nan_q() };
        for c in q.to_array() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<QField, FieldError> {
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    if &word != MAGIC {
        return Err(FieldError::Format("bad magic".into()));
    }
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(FieldError::Format(format!("unsupported version {version}")));
    }
    input.read_exact(&mut word)?;
    let mut spec = vec![0u8; u32::from_le_bytes(word) as usize];
    input.read_exact(&mut spec)?;
    let spec: GridSpec = serde_json::from_slice(&spec).map_err(|e| FieldError::Format(e.to_string()))?;
    let grid = Arc::new(ChartGrid::from(spec));
    let mut dim = [0u8; 8];
    input.read_exact(&mut dim)?;
    let nx = u64::from_le_bytes(dim) as usize;
    input.read_exact(&mut dim)?;
    let ny = u64::from_le_bytes(dim) as usize;
    if nx != grid.nx || ny != grid.ny {
        return Err(FieldError::Format("lattice size does not match grid spec".into()));
    }
    let mut raw = vec![0u8; 32 * grid.len()];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(32)
        .map(|c| {
            let d = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            Q::new(d(0), d(1), d(2), d(3))
        })
        .collect();
    Ok(QField::from_values(&grid, values))
}
