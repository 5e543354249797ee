//! File helpers: atomic writes, content hashing, the feature cache.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Writes `bytes` to a temp file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        // temp files start out owner-only
        let perms = fs::Permissions::from_mode(0o644);
        tmp.as_file()
            .set_permissions(perms)
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a file, or of every regular file in a directory (sorted by
/// name, each prefixed with its name).
pub fn hash_path(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        let mut names: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        for file in names {
            hasher.update(file.file_name().unwrap_or_default().as_encoded_bytes());
            hasher.update([0u8]);
            stream_into(&file, &mut hasher)?;
        }
    } else {
        stream_into(path, &mut hasher)?;
    }
    Ok(hex(&hasher.finalize()))
}

fn stream_into(path: &Path, hasher: &mut Sha256) -> Result<()> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

pub fn hash_str(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    hex(&hasher.finalize())
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    vectors: Vec<FeatureVector>,
}

/// Extracted feature vectors keyed by content and configuration hashes.
pub struct FeatureCache {
    dir: Option<PathBuf>,
}

impl FeatureCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        FeatureCache { dir }
    }

    fn file(&self, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{key}.features.json")))
    }

    pub fn get(&self, key: &str) -> Option<Vec<FeatureVector>> {
        let text = fs::read_to_string(self.file(key)?).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.key == key).then_some(entry.vectors)
    }

    pub fn put(&self, key: &str, vectors: &[FeatureVector]) -> Result<()> {
        let Some(path) = self.file(key) else {
            return Ok(());
        };
        let entry = CacheEntry {
            key: key.to_string(),
            vectors: vectors.to_vec(),
        };
        let text = serde_json::to_string(&entry).map_err(|e| Error::Format(e.to_string()))?;
        write_atomic(&path, text.as_bytes())
    }

    /// Returns cached vectors or computes and stores them.
    pub fn get_or_compute(
        &self,
        key: &str,
        compute: impl FnOnce() -> Vec<FeatureVector>,
    ) -> Result<Vec<FeatureVector>> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = compute();
        self.put(key, &v)?;
        Ok(v)
    }
}
