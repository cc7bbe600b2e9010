//! Manifest files: one [`QARecord`] per JSONL line. A record's `video_dir`
//! is relative to the directory holding the manifest.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::taskgen::QARecord;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Accepts the manifest file itself or the directory containing it.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<QARecord>> {
    let path = manifest_path(path);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: QARecord = serde_json::from_str(line)
            .map_err(|e| Error::json(format!("{} line {}", path.display(), i + 1), e))?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::Config(format!(
                "{} line {}: duplicate record id {}",
                path.display(),
                i + 1,
                rec.id
            )));
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn write_manifest(path: &Path, records: &[QARecord]) -> Result<()> {
    let mut buf = Vec::new();
    for rec in records {
        serde_json::to_writer(&mut buf, rec).map_err(|e| Error::json(format!("record {}", rec.id), e))?;
        buf.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Directory against which a manifest's relative paths resolve.
pub fn manifest_root(path: &Path) -> PathBuf {
    manifest_path(path)
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}
