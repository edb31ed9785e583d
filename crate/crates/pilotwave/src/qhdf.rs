//! QHDF grid dumps: a minimal self-describing binary container for real or
//! complex fields on rectangular grids.
//!
//! Layout, little-endian throughout: magic bytes `QHDF`, version u32 = 1,
//! ndim u32, per-axis sample counts u32, per-axis bounds as two f64
//! (lower, upper), then row-major f64 samples — one per point for real
//! fields, two interleaved (re, im) per point for complex fields. The reader
//! tells the two payloads apart by length. Grid boundary conditions are not
//! part of the format; the caller supplies them when rebuilding fields.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{ComplexField, RealField};
use crate::grid::{Boundary, Grid, GridError};

const MAGIC: &[u8; 4] = b"QHDF";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum QhdfError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("not a QHDF file (bad magic)")]
    BadMagic,
    #[error("unsupported QHDF version {0}")]
    BadVersion(u32),
    #[error("ndim must be 1 or 2, got {0}")]
    BadDimension(u32),
    #[error("axis {axis} declares {count} samples")]
    BadCount { axis: usize, count: u64 },
    #[error("payload holds {got} f64 values; expected {want_real} (real) or {want_complex} (complex)")]
    PayloadSize { got: usize, want_real: usize, want_complex: usize },
    #[error("stored payload is {got}, caller asked for {want}")]
    WrongKind { got: &'static str, want: &'static str },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Raw payload of a QHDF file.
#[derive(Debug, Clone)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// A parsed QHDF file: grid geometry plus samples, before boundary
/// conditions are attached.
#[derive(Debug, Clone)]
pub struct QhdfData {
    pub counts: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub samples: Samples,
}

impl QhdfData {
    /// Rebuild the grid with the caller-supplied boundary.
    pub fn grid(&self, boundary: Boundary) -> Result<Arc<Grid>, QhdfError> {
        let grid = match self.counts.len() {
            1 => Grid::line(self.bounds[0].0, self.bounds[0].1, self.counts[0], boundary)?,
            _ => Grid::rectangle(
                (self.bounds[0].0, self.bounds[0].1, self.counts[0]),
                (self.bounds[1].0, self.bounds[1].1, self.counts[1]),
                boundary,
            )?,
        };
        Ok(Arc::new(grid))
    }

    /// Interpret the payload as a complex field.
    pub fn into_complex(self, boundary: Boundary) -> Result<ComplexField, QhdfError> {
        let grid = self.grid(boundary)?;
        match self.samples {
            Samples::Complex(data) => {
                Ok(ComplexField::new(grid, data).expect("counts checked against payload"))
            }
            Samples::Real(_) => Err(QhdfError::WrongKind { got: "real", want: "complex" }),
        }
    }

    /// Interpret the payload as a real field.
    pub fn into_real(self, boundary: Boundary) -> Result<RealField, QhdfError> {
        let grid = self.grid(boundary)?;
        match self.samples {
            Samples::Real(data) => {
                Ok(RealField::new(grid, data).expect("counts checked against payload"))
            }
            Samples::Complex(_) => Err(QhdfError::WrongKind { got: "complex", want: "real" }),
        }
    }
}

fn write_header<W: Write>(out: &mut W, grid: &Grid) -> Result<(), QhdfError> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.ndim() as u32).to_le_bytes())?;
    for a in 0..grid.ndim() {
        out.write_all(&(grid.axis(a).count as u32).to_le_bytes())?;
    }
    for a in 0..grid.ndim() {
        out.write_all(&grid.axis(a).lower.to_le_bytes())?;
        out.write_all(&grid.axis(a).upper.to_le_bytes())?;
    }
    Ok(())
}

/// Write a complex field (two interleaved f64 per point).
pub fn write_complex(path: &Path, field: &ComplexField) -> Result<(), QhdfError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, field.grid())?;
    for z in field.data() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Write a real field (one f64 per point).
pub fn write_real(path: &Path, field: &RealField) -> Result<(), QhdfError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, field.grid())?;
    for v in field.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, QhdfError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64, QhdfError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Read a QHDF file; the payload kind is inferred from its length.
pub fn read(path: &Path) -> Result<QhdfData, QhdfError> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(QhdfError::BadMagic);
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(QhdfError::BadVersion(version));
    }
    let ndim = read_u32(&mut input)?;
    if ndim == 0 || ndim > 2 {
        return Err(QhdfError::BadDimension(ndim));
    }
    let mut counts = Vec::with_capacity(ndim as usize);
    for axis in 0..ndim as usize {
        let count = read_u32(&mut input)? as u64;
        if count == 0 || count > (1 << 28) {
            return Err(QhdfError::BadCount { axis, count });
        }
        counts.push(count as usize);
    }
    let mut bounds = Vec::with_capacity(ndim as usize);
    for _ in 0..ndim {
        let lower = read_f64(&mut input)?;
        let upper = read_f64(&mut input)?;
        bounds.push((lower, upper));
    }
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() % 8 != 0 {
        return Err(QhdfError::PayloadSize {
            got: payload.len() / 8,
            want_real: counts.iter().product(),
            want_complex: 2 * counts.iter().product::<usize>(),
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let points: usize = counts.iter().product();
    let samples = if values.len() == points {
        Samples::Real(values)
    } else if values.len() == 2 * points {
        Samples::Complex(
            values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        )
    } else {
        return Err(QhdfError::PayloadSize {
            got: values.len(),
            want_real: points,
            want_complex: 2 * points,
        });
    };
    Ok(QhdfData { counts, bounds, samples })
}
