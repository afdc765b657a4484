//! CSV and binary encodings of [`WignerMap`].
//!
//! Binary layout, all little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 8     | magic `b"WIGNMAP1"` |
//! | 8     | `nx` (u64) |
//! | 8     | `np` (u64) |
//! | 4 × 8 | `x_min, x_max, p_min, p_max` (f64) |
//! | 8     | convention constant (f64, `π/2` or `π`) |
//! | 8·nx·np | values (f64), row-major with `x` outer |

use std::io::{self, Read, Write};

use super::{GridSpec, WignerConvention, WignerMap};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"WIGNMAP1";

/// `x,p,W` rows with a header line.
pub fn write_csv<W: Write>(map: &WignerMap, mut out: W) -> io::Result<()> {
    let g = map.grid();
    writeln!(out, "x,p,W")?;
    for ix in 0..g.nx {
        for ip in 0..g.np {
            writeln!(out, "{:.6},{:.6},{:.12e}", g.x(ix), g.p(ip), map.value(ix, ip))?;
        }
    }
    Ok(())
}

pub fn write_binary<W: Write>(map: &WignerMap, mut out: W) -> io::Result<()> {
    let g = map.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(g.nx as u64).to_le_bytes())?;
    out.write_all(&(g.np as u64).to_le_bytes())?;
    for v in [g.x_min, g.x_max, g.p_min, g.p_max, map.convention_constant()] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in map.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| Error::Format(e.to_string()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<WignerMap> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|e| Error::Format(e.to_string()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let nx = read_u64(&mut input)? as usize;
    let np = read_u64(&mut input)? as usize;
    let grid = GridSpec {
        x_min: read_f64(&mut input)?,
        x_max: read_f64(&mut input)?,
        p_min: read_f64(&mut input)?,
        p_max: read_f64(&mut input)?,
        nx,
        np,
    };
    let c = read_f64(&mut input)?;
    let convention =
        WignerConvention::from_constant(c).ok_or_else(|| Error::Format(format!("unknown convention constant {c}")))?;
    let count = nx
        .checked_mul(np)
        .ok_or_else(|| Error::Format("grid size overflows".into()))?;
    let mut values = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        values.push(read_f64(&mut input)?);
    }
    let mut extra = [0u8; 1];
    if input.read(&mut extra).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    WignerMap::from_values(grid, convention, values)
}
