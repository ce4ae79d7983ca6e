//! On-disk cache of pair-sampling tables, keyed by the content of `A`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::s2::{vs_preprocess_s2, VsPreprocS2};
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

/// Bumped whenever the table layout changes.
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Sidecar {
    version: u32,
    key: String,
    tables: VsPreprocS2,
}

/// SHA-256 over the shape and the three CSR arrays, little-endian.
pub fn content_hash(a: &CsrMatrix) -> String {
    let mut h = Sha256::new();
    h.update((a.rows() as u64).to_le_bytes());
    h.update((a.cols() as u64).to_le_bytes());
    for &p in a.row_ptr() {
        h.update((p as u64).to_le_bytes());
    }
    for &c in a.col_idx() {
        h.update((c as u64).to_le_bytes());
    }
    for &v in a.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("vs2-{key}.json"))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads cached tables; `Ok(None)` on a miss, a stale version or a key
/// mismatch.
pub fn load(dir: &Path, key: &str) -> Result<Option<VsPreprocS2>> {
    let path = cache_path(dir, key);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path, e)),
    };
    let sidecar: Sidecar = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    if sidecar.version != CACHE_FORMAT_VERSION || sidecar.key != key {
        return Ok(None);
    }
    Ok(Some(sidecar.tables))
}

pub fn store(dir: &Path, key: &str, tables: &VsPreprocS2) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = cache_path(dir, key);
    let sidecar = Sidecar {
        version: CACHE_FORMAT_VERSION,
        key: key.to_owned(),
        tables: tables.clone(),
    };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec(&sidecar)?).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Returns cached tables when present, otherwise builds and stores them.
/// The flag reports a cache hit.
pub fn load_or_build(dir: &Path, a: &CsrMatrix) -> Result<(VsPreprocS2, bool)> {
    let key = content_hash(a);
    if let Some(t) = load(dir, &key)? {
        return Ok((t, true));
    }
    let tables = vs_preprocess_s2(a)?;
    store(dir, &key, &tables)?;
    Ok((tables, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_values_and_shape() {
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 2.0)]).unwrap();
        let c = CsrMatrix::from_triplets(3, 4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(content_hash(&a), content_hash(&CsrMatrix::identity(3)));
        assert_ne!(content_hash(&a), content_hash(&b));
        assert_ne!(content_hash(&a), content_hash(&c));
        assert_eq!(content_hash(&a).len(), 64);
    }

    #[test]
    fn round_trip_and_hit() {
        let dir = tempfile::tempdir().unwrap();
        let a = CsrMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let (t1, hit1) = load_or_build(dir.path(), &a).unwrap();
        let (t2, hit2) = load_or_build(dir.path(), &a).unwrap();
        assert!(!hit1);
        assert!(hit2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn corrupt_or_stale_file_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let key = "0".repeat(64);
        fs::write(cache_path(dir.path(), &key), "not json").unwrap();
        assert!(load(dir.path(), &key).unwrap().is_none());
    }
}
