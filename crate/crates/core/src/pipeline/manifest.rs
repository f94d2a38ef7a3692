use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMES_FILE: &str = "manifest.times.json";
pub const LOCK_FILE: &str = ".lock";
/// Directory for dumps of failed runs; never trusted by later stages.
pub const FAILED_DIR: &str = "failed";

/// Paths in the output directory that the manifest deliberately does not
/// track. Everything else must be listed under some stage.
pub const IGNORED: [&str; 4] = [MANIFEST_FILE, TIMES_FILE, LOCK_FILE, "failed/"];

pub fn is_ignored(rel: &str) -> bool {
    IGNORED.iter().any(|p| {
        if p.ends_with('/') {
            rel.starts_with(p)
        } else {
            rel == *p
        }
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Writes through a hidden temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let res = (|| -> Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

/// Removes leftover temp files of interrupted writes.
pub fn clean_temp_files(dir: &Path) -> Result<usize> {
    let mut removed = 0;
    if !dir.is_dir() {
        return Ok(0);
    }
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            removed += clean_temp_files(&path)?;
        } else {
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') && name.ends_with(".tmp") {
                fs::remove_file(&path)?;
                removed += 1;
            }
        }
    }
    Ok(removed)
}

/// Every regular file under `dir`, as sorted `/`-separated relative paths.
pub fn list_files(dir: &Path) -> Result<Vec<String>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            if entry.file_type()?.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).expect("walk stays under root");
                let parts: Vec<String> = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect();
                out.push(parts.join("/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if dir.is_dir() {
        walk(dir, dir, &mut out)?;
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    /// Hash of the stage's config, its upstream fingerprints and its input
    /// checksums.
    pub fingerprint: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Failed validation checks; a stage with failures is complete but
    /// keeps reporting failure.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub version: String,
    pub config_hash: String,
    pub stages: BTreeMap<String, StageEntry>,
    pub ignored: Vec<String>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            stages: BTreeMap::new(),
            ignored: IGNORED.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn load(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        Ok(Some(serde_json::from_str(&text)?))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    /// `None` when every listed output exists with its recorded checksum,
    /// else a description of the first mismatch.
    pub fn verify_outputs(&self, dir: &Path, stage: &str) -> Result<Option<String>> {
        let Some(entry) = self.stages.get(stage) else {
            return Ok(Some(format!("stage `{stage}` has not run")));
        };
        for (rel, sum) in &entry.outputs {
            let path = dir.join(rel);
            if !path.is_file() {
                return Ok(Some(format!("{rel} is missing")));
            }
            if sha256_file(&path)? != *sum {
                return Ok(Some(format!("{rel} does not match its recorded checksum")));
            }
        }
        Ok(None)
    }
}

/// Stage timestamps, kept out of the manifest so reruns stay
/// byte-identical.
pub fn record_time(dir: &Path, stage: &str, started: &str, finished: &str) -> Result<()> {
    let path = dir.join(TIMES_FILE);
    let mut times: BTreeMap<String, BTreeMap<String, String>> = match fs::read_to_string(&path) {
        Ok(t) => serde_json::from_str(&t).unwrap_or_default(),
        Err(_) => BTreeMap::new(),
    };
    times.insert(
        stage.to_string(),
        BTreeMap::from([
            ("started".to_string(), started.to_string()),
            ("finished".to_string(), finished.to_string()),
        ]),
    );
    write_atomic(&path, serde_json::to_string_pretty(&times)?.as_bytes())
}

/// Exclusive lock on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Locked(dir.to_path_buf()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("sub/x.txt");
        write_atomic(&p, b"hello").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"hello");
        assert_eq!(list_files(d.path()).unwrap(), vec!["sub/x.txt"]);
        assert_eq!(sha256_file(&p).unwrap(), sha256_hex(b"hello"));
    }

    #[test]
    fn temp_files_are_cleaned() {
        let d = tempfile::tempdir().unwrap();
        fs::create_dir_all(d.path().join("a")).unwrap();
        fs::write(d.path().join("a/.x.tsv.tmp"), b"partial").unwrap();
        fs::write(d.path().join("a/y.tsv"), b"ok").unwrap();
        assert_eq!(clean_temp_files(d.path()).unwrap(), 1);
        assert_eq!(list_files(d.path()).unwrap(), vec!["a/y.tsv"]);
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let d = tempfile::tempdir().unwrap();
        let l = DirLock::acquire(d.path()).unwrap();
        assert!(matches!(DirLock::acquire(d.path()), Err(Error::Locked(_))));
        drop(l);
        DirLock::acquire(d.path()).unwrap();
    }

    #[test]
    fn ignore_rules() {
        assert!(is_ignored("manifest.json"));
        assert!(is_ignored("failed/embeddings.bin"));
        assert!(!is_ignored("panel.csv"));
    }
}
