//! Field dumps, curve tables and atomic file output.
//!
//! Binary field layout (little endian):
//!
//! ```text
//! b"HOMF"  u32 version=1  u32 nx  u32 ny
//! f64 extent_x  f64 extent_y  f64 center_x  f64 center_y
//! nx*ny x (f64 re, f64 im), row-major in y (index j*nx + i)
//! ```
//!
//! The CSV form carries the same metadata on `#` header lines followed by
//! `x,y,re,im` rows in the same order.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::HomError;
use crate::fields::{ComplexField2D, Grid2D};

pub const FIELD_MAGIC: &[u8; 4] = b"HOMF";
pub const FIELD_VERSION: u32 = 1;

#[derive(Debug)]
pub enum DumpError {
    Io(io::Error),
    Format(String),
    Field(HomError),
}

impl std::fmt::Display for DumpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DumpError::Io(e) => write!(f, "i/o error: {e}"),
            DumpError::Format(m) => write!(f, "malformed field dump: {m}"),
            DumpError::Field(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DumpError {}

impl From<io::Error> for DumpError {
    fn from(e: io::Error) -> Self {
        DumpError::Io(e)
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn field_to_bytes(field: &ComplexField2D<f64>) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(4 + 12 + 32 + 16 * g.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    for v in [g.extent_x, g.extent_y, g.center_x, g.center_y] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<ComplexField2D<f64>, DumpError> {
    let bad = |m: &str| DumpError::Format(m.to_string());
    if bytes.len() < 48 || &bytes[..4] != FIELD_MAGIC {
        return Err(bad("missing HOMF header"));
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    if u32_at(4) != FIELD_VERSION {
        return Err(bad("unsupported version"));
    }
    let (nx, ny) = (u32_at(8) as usize, u32_at(12) as usize);
    let grid = Grid2D::with_center(nx, ny, f64_at(16), f64_at(24), f64_at(32), f64_at(40)).map_err(DumpError::Field)?;
    if bytes.len() != 48 + 16 * grid.len() {
        return Err(bad("payload length does not match the grid"));
    }
    let values = (0..grid.len()).map(|k| Complex::new(f64_at(48 + 16 * k), f64_at(56 + 16 * k))).collect();
    ComplexField2D::from_values(grid, values).map_err(DumpError::Field)
}

pub fn field_to_csv(field: &ComplexField2D<f64>, description: &str) -> String {
    let g = field.grid();
    let mut s = String::new();
    let _ = writeln!(s, "# {description}");
    let _ = writeln!(s, "# nx={} ny={}", g.nx, g.ny);
    let _ = writeln!(s, "# extent_x={} extent_y={} center_x={} center_y={}", g.extent_x, g.extent_y, g.center_x, g.center_y);
    s.push_str("x,y,re,im\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let v = field.at(i, j);
            let _ = writeln!(s, "{},{},{},{}", g.x(i), g.y(j), v.re, v.im);
        }
    }
    s
}

pub fn field_from_csv(text: &str) -> Result<ComplexField2D<f64>, DumpError> {
    let bad = |m: String| DumpError::Format(m);
    let mut meta = std::collections::HashMap::new();
    let mut values = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
        } else if !header_seen {
            if line.trim() != "x,y,re,im" {
                return Err(bad(format!("expected column header, got {line:?}")));
            }
            header_seen = true;
        } else if !line.trim().is_empty() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 columns, got {line:?}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            values.push(Complex::new(parse(cols[2])?, parse(cols[3])?));
        }
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| bad(format!("missing header key {k}")));
    let usize_of = |k: &str| get(k)?.parse::<usize>().map_err(|e| bad(format!("{k}: {e}")));
    let f64_of = |k: &str| get(k)?.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
    let grid = Grid2D::with_center(
        usize_of("nx")?,
        usize_of("ny")?,
        f64_of("extent_x")?,
        f64_of("extent_y")?,
        f64_of("center_x")?,
        f64_of("center_y")?,
    )
    .map_err(DumpError::Field)?;
    if values.len() != grid.len() {
        return Err(bad(format!("expected {} rows, got {}", grid.len(), values.len())));
    }
    ComplexField2D::from_values(grid, values).map_err(DumpError::Field)
}

/// `delay_um,rate[,count]` table with shortest round-trip float formatting.
pub fn curve_csv(delays_um: &[f64], rates: &[f64], counts: Option<&[u64]>) -> String {
    let mut s = String::from(if counts.is_some() { "delay_um,rate,count\n" } else { "delay_um,rate\n" });
    for (k, (d, r)) in delays_um.iter().zip(rates).enumerate() {
        match counts {
            Some(c) => {
                let _ = writeln!(s, "{d},{r},{}", c[k]);
            }
            None => {
                let _ = writeln!(s, "{d},{r}");
            }
        }
    }
    s
}
