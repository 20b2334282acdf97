//! Versioned binary cache for eigenfunction tables.
//!
//! Layout: magic "DSPEC1", a length-prefixed JSON header with the table
//! inputs, then the phase shifts and s-waves as little-endian f64 bits, so a
//! reload is bit-identical.

use crate::config::{hex_digest, GridConfig};
use crate::error::{DspecError, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::potential::RadialPotential;
use crate::radialwave::{EigenfunctionTable, PartialWaveSolution};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 6] = b"DSPEC1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    potential: RadialPotential,
    grid: RadialGrid,
    kgrid: KGrid,
    l_max: usize,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.b.len() {
            return Err(DspecError::Cache("truncated cache file".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        (0..n).map(|_| self.f64()).collect()
    }
}

/// Serialized table bytes.
pub fn table_bytes(t: &EigenfunctionTable) -> Vec<u8> {
    let mut w = Writer(MAGIC.to_vec());
    let header = Header { potential: t.potential, grid: t.grid, kgrid: t.kgrid, l_max: t.l_max };
    let hj = serde_json::to_vec(&header).expect("header serializes");
    w.u64(hj.len() as u64);
    w.0.extend_from_slice(&hj);
    w.u64(t.phase_shifts.len() as u64);
    for row in &t.phase_shifts {
        w.f64s(row);
    }
    w.u64(t.s_waves.len() as u64);
    for s in &t.s_waves {
        w.u64(s.ell as u64);
        for v in [s.kappa, s.phase_shift, s.h, s.r_ext, s.matching_residual] {
            w.f64(v);
        }
        w.f64s(&s.q);
    }
    w.0
}

/// Hex SHA-256 of the serialized table.
pub fn table_hash(t: &EigenfunctionTable) -> String {
    hex_digest(&table_bytes(t))
}

pub fn table_from_bytes(b: &[u8]) -> Result<EigenfunctionTable> {
    if b.len() < MAGIC.len() || &b[..MAGIC.len()] != MAGIC {
        return Err(DspecError::Cache("missing or mismatched DSPEC1 header".into()));
    }
    let mut r = Reader { b, pos: MAGIC.len() };
    let n = r.u64()? as usize;
    let header: Header = serde_json::from_slice(r.take(n)?).map_err(|e| DspecError::Cache(e.to_string()))?;
    let rows = r.u64()? as usize;
    let phase_shifts = (0..rows).map(|_| r.f64s()).collect::<Result<Vec<_>>>()?;
    let nw = r.u64()? as usize;
    let mut s_waves = Vec::with_capacity(nw);
    for _ in 0..nw {
        let ell = r.u64()? as usize;
        let kappa = r.f64()?;
        let phase_shift = r.f64()?;
        let h = r.f64()?;
        let r_ext = r.f64()?;
        let matching_residual = r.f64()?;
        let q = r.f64s()?;
        s_waves.push(PartialWaveSolution { ell, kappa, phase_shift, h, q, r_ext, matching_residual });
    }
    if r.pos != b.len() {
        return Err(DspecError::Cache("trailing bytes in cache file".into()));
    }
    Ok(EigenfunctionTable::assemble(header.potential, header.grid, header.kgrid, header.l_max, phase_shifts, s_waves))
}

pub fn save_table(path: &Path, t: &EigenfunctionTable) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, table_bytes(t))?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<EigenfunctionTable> {
    table_from_bytes(&std::fs::read(path)?)
}

/// Cache file for a potential and grid pair.
pub fn cache_path(dir: &Path, p: &RadialPotential, g: &GridConfig) -> PathBuf {
    let key = serde_json::to_string(&(p, g)).expect("key serializes");
    dir.join(format!("table-{}.dspec", &hex_digest(key.as_bytes())[..16]))
}

/// Loads the cached table if present and matching, else builds and stores it.
/// The flag reports a cache hit.
pub fn load_or_build(dir: &Path, p: &RadialPotential, g: &GridConfig) -> Result<(EigenfunctionTable, bool)> {
    let path = cache_path(dir, p, g);
    if path.exists() {
        let t = load_table(&path)?;
        if t.potential == *p && t.grid == g.radial() && t.kgrid == g.kgrid() {
            return Ok((t, true));
        }
    }
    let t = EigenfunctionTable::build(p, g.radial(), g.kgrid(), g.l_max)?;
    save_table(&path, &t)?;
    Ok((t, false))
}
