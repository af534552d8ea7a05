//! Field snapshots: a plain-text metadata sidecar plus a raw binary payload
//! of little-endian f64 values, row-major, fields concatenated in declared
//! order. The round trip is bit-exact and the format is trivially parseable
//! from any language.

use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::field::RealField;
use crate::grid::Grid;
use crate::{Error, Result};

/// Parsed contents of a `.meta` sidecar.
#[derive(Clone, Debug)]
pub struct SnapshotMeta {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub time: f64,
    pub fields: Vec<String>,
}

/// Write `<base>.meta` and `<base>.bin` for the named fields.
pub fn write_snapshot(base: &Path, time: f64, fields: &[(&str, &RealField)]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::Snapshot("no fields to write".into()));
    }
    let grid = fields[0].1.grid();
    for (name, f) in fields {
        if !f.grid().same_as(grid) {
            return Err(Error::Snapshot(format!("field '{name}' is on a different grid")));
        }
    }
    let meta_path = base.with_extension("meta");
    let bin_path = base.with_extension("bin");
    let mut meta = BufWriter::new(std::fs::File::create(meta_path)?);
    writeln!(meta, "nx = {}", grid.nx())?;
    writeln!(meta, "ny = {}", grid.ny())?;
    writeln!(meta, "lx = {:.16e}", grid.lx())?;
    writeln!(meta, "ly = {:.16e}", grid.ly())?;
    writeln!(meta, "time = {:.16e}", time)?;
    let names: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
    writeln!(meta, "fields = {}", names.join(","))?;
    writeln!(meta, "endianness = little")?;
    meta.flush()?;

    let mut bin = BufWriter::new(std::fs::File::create(bin_path)?);
    for (_, f) in fields {
        for v in f.data() {
            bin.write_all(&v.to_le_bytes())?;
        }
    }
    bin.flush()?;
    Ok(())
}

/// Read a snapshot back; the payload size must match the metadata exactly.
pub fn read_snapshot(base: &Path) -> Result<(SnapshotMeta, Vec<(String, RealField)>)> {
    let meta_path = base.with_extension("meta");
    let bin_path = base.with_extension("bin");
    let text = std::fs::read_to_string(&meta_path)?;
    let mut nx = None;
    let mut ny = None;
    let mut lx = None;
    let mut ly = None;
    let mut time = None;
    let mut fields: Option<Vec<String>> = None;
    let mut endian = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Snapshot(format!("malformed metadata line '{line}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "nx" => nx = Some(parse(value, "nx")?),
            "ny" => ny = Some(parse(value, "ny")?),
            "lx" => lx = Some(parse(value, "lx")?),
            "ly" => ly = Some(parse(value, "ly")?),
            "time" => time = Some(parse(value, "time")?),
            "fields" => {
                fields = Some(value.split(',').map(|s| s.trim().to_string()).collect())
            }
            "endianness" => endian = Some(value.to_string()),
            other => return Err(Error::Snapshot(format!("unknown metadata key '{other}'"))),
        }
    }
    let meta = SnapshotMeta {
        nx: nx.ok_or_else(|| Error::Snapshot("missing nx".into()))?,
        ny: ny.ok_or_else(|| Error::Snapshot("missing ny".into()))?,
        lx: lx.ok_or_else(|| Error::Snapshot("missing lx".into()))?,
        ly: ly.ok_or_else(|| Error::Snapshot("missing ly".into()))?,
        time: time.ok_or_else(|| Error::Snapshot("missing time".into()))?,
        fields: fields.ok_or_else(|| Error::Snapshot("missing fields".into()))?,
    };
    match endian.as_deref() {
        Some("little") => {}
        other => {
            return Err(Error::Snapshot(format!(
                "unsupported endianness {other:?}"
            )))
        }
    }
    let payload = std::fs::read(&bin_path)?;
    let expected = meta.nx * meta.ny * meta.fields.len() * 8;
    if payload.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload size {} does not match metadata ({} bytes expected)",
            payload.len(),
            expected
        )));
    }
    let grid = Grid::new(meta.nx, meta.ny, meta.lx, meta.ly)?;
    let per_field = meta.nx * meta.ny;
    let mut out = Vec::with_capacity(meta.fields.len());
    for (i, name) in meta.fields.iter().enumerate() {
        let start = i * per_field * 8;
        let data: Vec<f64> = payload[start..start + per_field * 8]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        out.push((name.clone(), RealField::from_vec(&grid, data)));
    }
    Ok((meta, out))
}

fn parse<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Snapshot(format!("invalid value '{value}' for '{key}'")))
}

/// Convenience for grids built elsewhere: check a read-back grid matches.
pub fn meta_matches(meta: &SnapshotMeta, grid: &Arc<Grid>) -> bool {
    meta.nx == grid.nx() && meta.ny == grid.ny() && meta.lx == grid.lx() && meta.ly == grid.ly()
}
