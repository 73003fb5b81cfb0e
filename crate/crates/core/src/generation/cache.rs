//! Disk cache for generated candidate sets.
//!
//! Layout: one JSON file per `(document_id, config_fingerprint)` under the
//! cache directory, body mirroring [`CandidateSet`]. Writes go to a
//! temporary file first and are renamed into place, so concurrent readers
//! never observe a partial file.

use std::fs;
use std::path::{Path, PathBuf};

use super::{CandidateSet, GenerationError};

fn io_err(path: &Path, source: std::io::Error) -> GenerationError {
    GenerationError::CacheIo {
        path: path.to_path_buf(),
        source,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Cache file path for a `(document_id, fingerprint)` pair. The hash
/// suffix keeps distinct ids apart even when sanitization collides.
pub fn cache_path(cache_dir: &Path, document_id: &str, fingerprint: &str) -> PathBuf {
    let name = format!(
        "{}-{:016x}.{}.json",
        sanitize(document_id),
        fnv1a(document_id.as_bytes()),
        fingerprint
    );
    cache_dir.join(name)
}

/// Persist a candidate set; returns the cache key (file stem).
pub fn cache_candidates(set: &CandidateSet, cache_dir: &Path) -> Result<String, GenerationError> {
    fs::create_dir_all(cache_dir).map_err(|e| io_err(cache_dir, e))?;
    let path = cache_path(cache_dir, &set.document_id, &set.config_fingerprint);
    let body = serde_json::to_vec_pretty(set).expect("candidate set serialization");
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, body).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
    Ok(path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default())
}

/// Load the candidate set cached for `(document_id, fingerprint)`.
/// `Ok(None)` means absent (including fingerprint mismatch).
pub fn load_candidates(
    document_id: &str,
    config_fingerprint: &str,
    cache_dir: &Path,
) -> Result<Option<CandidateSet>, GenerationError> {
    let path = cache_path(cache_dir, document_id, config_fingerprint);
    let bytes = match fs::read(&path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path, e)),
    };
    let set: CandidateSet =
        serde_json::from_slice(&bytes).map_err(|e| GenerationError::CorruptCache {
            path: path.clone(),
            detail: e.to_string(),
        })?;
    if set.document_id != document_id || set.config_fingerprint != config_fingerprint {
        return Err(GenerationError::CorruptCache {
            path,
            detail: "cached body does not match requested key".to_string(),
        });
    }
    Ok(Some(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguageTag;
    use crate::generation::CandidateSummary;

    fn sample_set() -> CandidateSet {
        CandidateSet {
            document_id: "doc/with:odd chars".to_string(),
            candidates: vec![CandidateSummary {
                text: "[english] a candidate".to_string(),
                language: LanguageTag::parse("english").unwrap(),
                group_index: 0,
                backend_score: Some(-1.25),
            }],
            config_fingerprint: "abcdef0123456789".to_string(),
        }
    }

    #[test]
    fn store_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let set = sample_set();
        cache_candidates(&set, dir.path()).unwrap();
        let loaded = load_candidates(&set.document_id, &set.config_fingerprint, dir.path())
            .unwrap()
            .unwrap();
        assert_eq!(loaded, set);
    }

    #[test]
    fn fingerprint_mismatch_is_absent() {
        let dir = tempfile::tempdir().unwrap();
        let set = sample_set();
        cache_candidates(&set, dir.path()).unwrap();
        let loaded = load_candidates(&set.document_id, "another_fingerprint", dir.path()).unwrap();
        assert!(loaded.is_none());
    }

    #[test]
    fn truncated_file_is_corrupt_cache() {
        let dir = tempfile::tempdir().unwrap();
        let set = sample_set();
        cache_candidates(&set, dir.path()).unwrap();
        let path = cache_path(dir.path(), &set.document_id, &set.config_fingerprint);
        let body = fs::read(&path).unwrap();
        fs::write(&path, &body[..body.len() / 2]).unwrap();
        let err =
            load_candidates(&set.document_id, &set.config_fingerprint, dir.path()).unwrap_err();
        assert!(matches!(err, GenerationError::CorruptCache { .. }));
    }

    #[test]
    fn distinct_ids_with_same_sanitization_do_not_collide() {
        let a = cache_path(Path::new("/c"), "doc:1", "f");
        let b = cache_path(Path::new("/c"), "doc/1", "f");
        assert_ne!(a, b);
    }
}
