//! On-disk JSON cache keyed by operation, canonical parameters and precision.
//!
//! One file per key. Writes go to a temporary file in the same directory and
//! are renamed into place. Unreadable or stale entries are skipped with a
//! warning and recomputed by the caller.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever cached payloads change meaning.
pub const CACHE_FORMAT: u32 = 1;

pub fn cache_version() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), CACHE_FORMAT)
}

#[derive(Serialize, Deserialize)]
struct Entry {
    version: String,
    key: String,
    payload: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryInfo {
    pub file: String,
    pub key: String,
    pub current: bool,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    /// Opens (creating if needed) a cache directory; on failure the cache is
    /// disabled with a warning.
    pub fn open(dir: Option<PathBuf>) -> Self {
        let Some(dir) = dir else { return Self::disabled() };
        match fs::create_dir_all(&dir).and_then(|_| probe_writable(&dir)) {
            Ok(()) => Self { dir: Some(dir) },
            Err(e) => {
                warn!("cache directory {} is not writable ({e}); caching disabled", dir.display());
                Self::disabled()
            }
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        let digest = hex::encode(Sha256::digest(key.as_bytes()));
        self.dir.as_ref().map(|d| d.join(format!("{}.json", &digest[..32])))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let path = self.path_for(key)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
            Err(e) => {
                warn!("cannot read cache entry {}: {e}", path.display());
                return None;
            }
        };
        let entry: Entry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                warn!("ignoring corrupted cache entry {}: {e}", path.display());
                return None;
            }
        };
        if entry.version != cache_version() || entry.key != key {
            return None;
        }
        match serde_json::from_value(entry.payload) {
            Ok(v) => Some(v),
            Err(e) => {
                warn!("ignoring malformed cache payload {}: {e}", path.display());
                None
            }
        }
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) {
        let Some(path) = self.path_for(key) else { return };
        let payload = match serde_json::to_value(value) {
            Ok(p) => p,
            Err(e) => {
                warn!("cannot serialize cache payload for {key}: {e}");
                return;
            }
        };
        let entry = Entry { version: cache_version(), key: key.to_string(), payload };
        if let Err(e) = write_atomic(&path, &serde_json::to_vec(&entry).expect("entry serializes")) {
            warn!("cannot write cache entry {}: {e}", path.display());
        }
    }

    pub fn entries(&self) -> io::Result<Vec<EntryInfo>> {
        let Some(dir) = &self.dir else { return Ok(Vec::new()) };
        let mut out = Vec::new();
        for item in fs::read_dir(dir)? {
            let path = item?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let file = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let parsed = fs::read_to_string(&path).ok().and_then(|t| serde_json::from_str::<Entry>(&t).ok());
            out.push(match parsed {
                Some(e) => EntryInfo { file, current: e.version == cache_version(), key: e.key },
                None => EntryInfo { file, key: "<unreadable>".into(), current: false },
            });
        }
        out.sort_by(|a, b| a.key.cmp(&b.key).then(a.file.cmp(&b.file)));
        Ok(out)
    }

    /// Removes every cache file; returns how many were deleted.
    pub fn clear(&self) -> io::Result<usize> {
        let Some(dir) = &self.dir else { return Ok(0) };
        let mut n = 0;
        for item in fs::read_dir(dir)? {
            let path = item?.path();
            if path.is_file() {
                fs::remove_file(&path)?;
                n += 1;
            }
        }
        Ok(n)
    }
}

fn probe_writable(dir: &Path) -> io::Result<()> {
    let probe = dir.join(format!(".probe-{}", std::process::id()));
    fs::write(&probe, b"")?;
    fs::remove_file(probe)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
