//! Flat binary container for torus fields.
//!
//! Layout: `b"TFLD"`, then `version`, `d`, `N`, `rank` as little-endian `u32`,
//! then the values as little-endian `f64`. A scalar (rank 0) is one row-major
//! block; a vector (rank 1) is `d` such blocks, one per component.

use std::path::Path;

use mikado_core::torus::{ScalarField, TorusGrid, VectorField};
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 4] = b"TFLD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum TfldError {
    #[error("not a TFLD container")]
    BadMagic,
    #[error("unsupported TFLD version {0}")]
    Version(u32),
    #[error("unsupported rank {0}")]
    Rank(u32),
    #[error("expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Grid(#[from] mikado_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> TorusGrid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(b) => b.grid(),
        }
    }
}

fn header(grid: TorusGrid, rank: u32, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * len);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, grid.dim() as u32, grid.n() as u32, rank] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn push_values(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_scalar(f: &ScalarField) -> Vec<u8> {
    let mut out = header(f.grid(), 0, f.values().len());
    push_values(&mut out, f.values());
    out
}

pub fn encode_vector(b: &VectorField) -> Vec<u8> {
    let grid = b.grid();
    let mut out = header(grid, 1, grid.len() * grid.dim());
    for c in b.components() {
        push_values(&mut out, c.values());
    }
    out
}

pub fn encode(data: &FieldData) -> Vec<u8> {
    match data {
        FieldData::Scalar(f) => encode_scalar(f),
        FieldData::Vector(b) => encode_vector(b),
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<FieldData, TfldError> {
    if bytes.len() < HEADER_LEN {
        return Err(TfldError::Length {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(TfldError::BadMagic);
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(TfldError::Version(version));
    }
    let d = u32_at(bytes, 8) as usize;
    let n = u32_at(bytes, 12) as usize;
    let rank = u32_at(bytes, 16);
    let grid = TorusGrid::new(d, n)?;
    let blocks = match rank {
        0 => 1,
        1 => d,
        r => return Err(TfldError::Rank(r)),
    };
    let expected = HEADER_LEN + 8 * blocks * grid.len();
    if bytes.len() != expected {
        return Err(TfldError::Length {
            expected,
            found: bytes.len(),
        });
    }
    let mut comps = Vec::with_capacity(blocks);
    for block in bytes[HEADER_LEN..].chunks_exact(8 * grid.len()) {
        let values = block
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        comps.push(ScalarField::from_values(grid, values)?);
    }
    Ok(if rank == 0 {
        FieldData::Scalar(comps.pop().expect("one block"))
    } else {
        FieldData::Vector(VectorField::from_components(comps)?)
    })
}

/// Lower-case hex SHA-256 of the encoded bytes, used by reports to name fields.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read(path: &Path) -> Result<FieldData, TfldError> {
    decode(&std::fs::read(path)?)
}

/// Writes the container and returns its content hash.
pub fn write(path: &Path, data: &FieldData) -> Result<String, TfldError> {
    let bytes = encode(data);
    std::fs::write(path, &bytes)?;
    Ok(content_hash(&bytes))
}
