pub mod analysis;
pub mod audit;
pub mod identity;

use std::fs;
use std::path::{Path, PathBuf};

use ellipse_sandpile::cache::{load_identity, store_identity, CachedIdentity};
use ellipse_sandpile::identity::{identity_boundary_source, IdentityResult};
use ellipse_sandpile::{Domain, EllipseSpec};
use serde_json::Value;

use crate::error::CliError;

pub const DEFAULT_CACHE_DIR: &str = "sandpile-cache";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_R: u32 = 10;

/// The identity of `domain`, from the cache under `cache` when present
/// there, otherwise computed and stored. The flag reports a cache hit.
pub fn obtain_identity(
    spec: &EllipseSpec,
    domain: &Domain,
    cache: Option<&Path>,
) -> Result<(IdentityResult, bool), CliError> {
    if let Some(root) = cache {
        if let Some(hit) = load_identity(root, spec)? {
            return Ok((IdentityResult { e: hit.e, v: hit.v, rounds: hit.rounds }, true));
        }
    }
    let result = identity_boundary_source(domain)?;
    if let Some(root) = cache {
        let item = CachedIdentity { e: result.e.clone(), v: result.v.clone(), rounds: result.rounds };
        store_identity(root, spec, &item)?;
    }
    Ok((result, false))
}

pub fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    ellipse_sandpile::cache::write_atomic(path, bytes).map_err(|e| CliError::new(crate::error::EXIT_RUNTIME, "Io", e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn cache_root(flag: Option<PathBuf>, config: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| config.cloned()).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}
