//! On-disk formats for [`SampledFunction`].
//!
//! Binary layout (little-endian):
//!
//! ```text
//! offset 0   u32  dim
//! offset 4   u32  n_points (per axis)
//! offset 8   f64  box length L
//! offset 16  f64  values[n_points^dim], row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, SampledFunction};
use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 16;

pub fn write_binary<W: Write>(u: &SampledFunction, mut w: W) -> Result<()> {
    let g = u.grid();
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n_points() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    for v in u.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SampledFunction> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("short header: {e}")))?;
    let dim = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let grid = Grid::new(dim, n, length)?;
    let mut buf = vec![0u8; grid.len() * 8];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SampledFunction::new(grid, values)
}

pub fn save_binary(u: &SampledFunction, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_binary(u, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<SampledFunction> {
    read_binary(BufReader::new(File::open(path)?))
}

/// CSV with columns `index, x[, y], value`.
pub fn write_csv<W: Write>(u: &SampledFunction, w: W) -> Result<()> {
    let g = u.grid();
    let mut out = csv::Writer::from_writer(w);
    if g.dim() == 1 {
        out.write_record(["index", "x", "value"])?;
    } else {
        out.write_record(["index", "x", "y", "value"])?;
    }
    for (i, v) in u.values().iter().enumerate() {
        let p = g.point(i);
        if g.dim() == 1 {
            out.write_record([i.to_string(), p[0].to_string(), v.to_string()])?;
        } else {
            out.write_record([
                i.to_string(),
                p[0].to_string(),
                p[1].to_string(),
                v.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(u: &SampledFunction, path: impl AsRef<Path>) -> Result<()> {
    write_csv(u, File::create(path)?)
}
