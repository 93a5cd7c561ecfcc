//! Field snapshots: little-endian f64 pairs (re, im), component-major,
//! with a JSON sidecar describing the grid.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Field, GridDesc};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SnapshotMeta {
    pub grid: GridDesc,
    pub points: usize,
    pub extent: f64,
    pub time: f64,
    pub components: usize,
    pub data: String,
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Write `<stem>.bin` and `<stem>.json`; returns the binary path.
pub fn write_snapshot(dir: &Path, stem: &str, field: &Field, time: f64) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{}.bin", stem));
    let mut bytes = Vec::with_capacity(field.l() * field.grid.len() * 16);
    for c in &field.comps {
        for z in c {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::write(&bin, bytes)?;
    let meta = SnapshotMeta {
        grid: field.grid,
        points: field.grid.len(),
        extent: field.grid.extent(),
        time,
        components: field.l(),
        data: bin.file_name().unwrap().to_string_lossy().into_owned(),
    };
    fs::write(sidecar_path(&bin), serde_json::to_string_pretty(&meta)?)?;
    Ok(bin)
}

/// Read a snapshot given either its `.bin` or `.json` path.
pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let bin = path.with_file_name(&meta.data);
    let bytes = fs::read(bin)?;
    let n = meta.points;
    if bytes.len() != meta.components * n * 16 {
        return Err(Error::LengthMismatch { expected: meta.components * n * 16, got: bytes.len() });
    }
    let mut comps = Vec::with_capacity(meta.components);
    for k in 0..meta.components {
        let mut c = Vec::with_capacity(n);
        for j in 0..n {
            let o = (k * n + j) * 16;
            let re = f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[o + 8..o + 16].try_into().unwrap());
            c.push(C64::new(re, im));
        }
        comps.push(c);
    }
    Ok((Field::new(meta.grid, comps)?, meta.time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridDesc::radial(5, 32, 3.0).unwrap();
        let f = Field::from_fn(g, 2, |k, r| C64::new((-r * r).exp() / (k + 1) as f64, r.sin() * 1e-300));
        let p = write_snapshot(dir.path(), "s0", &f, 1.25).unwrap();
        let (back, t) = read_snapshot(&p).unwrap();
        assert_eq!(t, 1.25);
        assert_eq!(back, f);
    }
}
