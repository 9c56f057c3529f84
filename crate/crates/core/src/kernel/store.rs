//! Binary kernel-matrix container.
//!
//! Layout: magic `OGKM`, format version as little-endian `u32`, size `n` as
//! little-endian `u64`, then `n * n` little-endian `f64` values row-major.
//! Instance ids live in a JSON sidecar `{"instance_ids": [...]}`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{KernelMatrix, MatrixError};

pub const MAGIC: &[u8; 4] = b"OGKM";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("sidecar lists {ids} ids but matrix has size {n}")]
    IdCount { ids: usize, n: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    instance_ids: Vec<String>,
}

pub fn write_matrix<W: Write>(mut w: W, m: &KernelMatrix) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.size() as u64).to_le_bytes())?;
    for v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the binary body; ids are placeholders `0..n` until a sidecar is
/// applied.
pub fn read_values<R: Read>(mut r: R) -> Result<(usize, Vec<f64>), StoreError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(StoreError::Magic(magic));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(StoreError::Version(version));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        r.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Ok((n, values))
}

pub fn sidecar_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("ids.json")
}

/// Writes the container and its id sidecar next to it.
pub fn save(path: &Path, m: &KernelMatrix) -> Result<(), StoreError> {
    let mut buf = Vec::with_capacity(16 + 8 * m.values().len());
    write_matrix(&mut buf, m)?;
    fs::write(path, buf)?;
    let sidecar = Sidecar {
        instance_ids: m.instance_ids().to_vec(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

pub fn load(path: &Path) -> Result<KernelMatrix, StoreError> {
    let (n, values) = read_values(fs::File::open(path)?)?;
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if sidecar.instance_ids.len() != n {
        return Err(StoreError::IdCount {
            ids: sidecar.instance_ids.len(),
            n,
        });
    }
    Ok(KernelMatrix::new(sidecar.instance_ids, values)?)
}
