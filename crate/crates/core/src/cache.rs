//! Binary grid files and the on-disk identity cache.
//!
//! `SPG1` holds a grain grid: the magic, origin `x`, `y` (i64 LE), width
//! and height (u32 LE), then one signed byte per cell in row-major order
//! from the bottom row, `-1` marking cells outside the domain.
//!
//! `SPV1` holds an integer field: the same header, one mask byte per cell,
//! then one i64 LE per cell.
//!
//! A cache entry is a directory named by the SHA-256 of the canonical
//! specification JSON, holding `e.spg`, `v.spv` and `manifest.json` with the
//! checksum of each file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::canonical_json;
use crate::geometry::EllipseSpec;
use crate::grid::{CellGrid, GridError, LatticePoint, SandpileConfig};

const GRAIN_MAGIC: &[u8; 4] = b"SPG1";
const FIELD_MAGIC: &[u8; 4] = b"SPV1";
const HEADER: usize = 4 + 8 + 8 + 4 + 4;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("not a {expected} file")]
    BadMagic { expected: &'static str },
    #[error("file is truncated or has trailing bytes")]
    Length,
    #[error("cell value {value} out of range")]
    BadValue { value: i64 },
    #[error("checksum mismatch for {file}")]
    CacheChecksumMismatch { file: String },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |e| CacheError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn header(magic: &[u8; 4], origin: LatticePoint, width: usize, height: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER);
    out.extend_from_slice(magic);
    out.extend_from_slice(&origin.x.to_le_bytes());
    out.extend_from_slice(&origin.y.to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out
}

fn read_header(bytes: &[u8], magic: &'static [u8; 4]) -> Result<(LatticePoint, usize, usize), CacheError> {
    if bytes.len() < HEADER {
        return Err(CacheError::Length);
    }
    if &bytes[..4] != magic {
        return Err(CacheError::BadMagic { expected: std::str::from_utf8(magic).expect("ascii magic") });
    }
    let i64_at = |o: usize| i64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    Ok((LatticePoint::new(i64_at(4), i64_at(12)), u32_at(20), u32_at(24)))
}

/// Encodes a grid of small values; cells outside the mask are written as
/// `-1`.
pub fn encode_grains(grid: &CellGrid<i64>) -> Result<Vec<u8>, CacheError> {
    let mut out = header(GRAIN_MAGIC, grid.origin(), grid.width(), grid.height());
    for (i, &v) in grid.values().iter().enumerate() {
        let v = if grid.mask()[i] { v } else { -1 };
        let b = i8::try_from(v).map_err(|_| CacheError::BadValue { value: v })?;
        out.push(b as u8);
    }
    Ok(out)
}

/// Decodes an `SPG1` file. Cells stored as `-1` are outside the mask and
/// hold `-1`.
pub fn decode_grains(bytes: &[u8]) -> Result<CellGrid<i64>, CacheError> {
    let (origin, w, h) = read_header(bytes, GRAIN_MAGIC)?;
    let body = &bytes[HEADER..];
    if body.len() != w * h {
        return Err(CacheError::Length);
    }
    let values: Vec<i64> = body.iter().map(|&b| b as i8 as i64).collect();
    let mask = values.iter().map(|&v| v != -1).collect();
    Ok(CellGrid::from_parts(origin, w, h, values, mask)?)
}

pub fn encode_field(grid: &CellGrid<i64>) -> Vec<u8> {
    let mut out = header(FIELD_MAGIC, grid.origin(), grid.width(), grid.height());
    out.extend(grid.mask().iter().map(|&m| m as u8));
    for v in grid.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<CellGrid<i64>, CacheError> {
    let (origin, w, h) = read_header(bytes, FIELD_MAGIC)?;
    let n = w * h;
    if bytes.len() != HEADER + n * 9 {
        return Err(CacheError::Length);
    }
    let mask: Vec<bool> = bytes[HEADER..HEADER + n].iter().map(|&b| b != 0).collect();
    let values =
        bytes[HEADER + n..].chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(CellGrid::from_parts(origin, w, h, values, mask)?)
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The cache key of a specification.
pub fn cache_key(spec: &EllipseSpec) -> String {
    sha256_hex(canonical_json(spec).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub key: String,
    pub spec: String,
    pub rounds: u64,
    pub e_sha256: String,
    pub v_sha256: String,
}

/// A cached identity: `e`, the odometer `v` and the number of rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedIdentity {
    pub e: SandpileConfig,
    pub v: CellGrid<i64>,
    pub rounds: u64,
}

pub const E_FILE: &str = "e.spg";
pub const V_FILE: &str = "v.spv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn entry_dir(root: &Path, spec: &EllipseSpec) -> PathBuf {
    root.join(cache_key(spec))
}

/// Stores an identity under `root`; returns the entry directory.
pub fn store_identity(root: &Path, spec: &EllipseSpec, item: &CachedIdentity) -> Result<PathBuf, CacheError> {
    let dir = entry_dir(root, spec);
    let e = encode_grains(item.e.grid())?;
    let v = encode_field(&item.v);
    write_atomic(&dir.join(E_FILE), &e)?;
    write_atomic(&dir.join(V_FILE), &v)?;
    let manifest = Manifest {
        key: cache_key(spec),
        spec: canonical_json(spec),
        rounds: item.rounds,
        e_sha256: sha256_hex(&e),
        v_sha256: sha256_hex(&v),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CacheError::Manifest(e.to_string()))?;
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(dir)
}

/// Loads the entry for `spec`, or `None` if there is none. Every file is
/// checked against the manifest.
pub fn load_identity(root: &Path, spec: &EllipseSpec) -> Result<Option<CachedIdentity>, CacheError> {
    let dir = entry_dir(root, spec);
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CacheError::Manifest(e.to_string()))?;
    if manifest.key != cache_key(spec) || manifest.spec != canonical_json(spec) {
        return Err(CacheError::Manifest("entry belongs to another specification".into()));
    }
    let read = |name: &str, sum: &str| -> Result<Vec<u8>, CacheError> {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if sha256_hex(&bytes) != sum {
            return Err(CacheError::CacheChecksumMismatch { file: name.to_string() });
        }
        Ok(bytes)
    };
    let e = decode_grains(&read(E_FILE, &manifest.e_sha256)?)?;
    let v = decode_field(&read(V_FILE, &manifest.v_sha256)?)?;
    let e = SandpileConfig::new(e)?;
    Ok(Some(CachedIdentity { e, v, rounds: manifest.rounds }))
}
