//! Field files: one JSON header line `{"dim":..,"N":..,"L":..}` followed by
//! `Nⁿ` little-endian `f64` values in row-major order. CSV export writes the
//! axis indices followed by the value.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Field, Grid};
use crate::error::{Error, Result};

#[derive(serde::Serialize, serde::Deserialize)]
struct Header {
    dim: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    side: f64,
}

pub fn write_field<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let g = field.grid();
    let header = Header { dim: g.dim(), n: g.n(), side: g.side() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(input: R) -> Result<Field> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Parse(format!("field header: {e}")))?;
    let grid = Grid::new(header.dim, header.n, header.side)?;
    let mut bytes = Vec::with_capacity(8 * grid.len());
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Parse(format!(
            "expected {} bytes of samples, found {}",
            8 * grid.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field::new(grid, values)
}

pub fn save(field: &Field, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_field(field, std::io::BufWriter::new(file))
}

pub fn load(path: &Path) -> Result<Field> {
    read_field(std::fs::File::open(path)?)
}

pub fn write_csv<W: Write>(field: &Field, out: W) -> Result<()> {
    let g = field.grid();
    let mut out = std::io::BufWriter::new(out);
    let names = ["i0", "i1", "i2"];
    writeln!(out, "{},value", names[..g.dim()].join(","))?;
    for (flat, v) in field.values().iter().enumerate() {
        let idx = g.unravel(flat);
        for i in &idx[..g.dim()] {
            write!(out, "{i},")?;
        }
        writeln!(out, "{v:e}")?;
    }
    out.flush()?;
    Ok(())
}
