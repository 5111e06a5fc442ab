//! Line-oriented file helpers shared by the loaders and writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Reads non-blank lines as `(1-based line number, text)`.
///
/// CRLF endings are rejected; every format in this crate is LF-only.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        if line.ends_with('\r') {
            return Err(Error::parse(path, lineno, "CRLF line ending (expected LF)"));
        }
        if line.trim().is_empty() {
            continue;
        }
        out.push((lineno, line.to_string()));
    }
    Ok(out)
}

pub fn parse_line<T: DeserializeOwned>(path: &Path, lineno: usize, line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::parse(path, lineno, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    read_lines(path)?
        .into_iter()
        .map(|(n, l)| parse_line(path, n, &l).map(|v| (n, v)))
        .collect()
}

/// Serializes each record on its own LF-terminated line.
pub fn to_jsonl_string<T: Serialize>(records: impl IntoIterator<Item = T>) -> Result<String> {
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(&r)?);
        buf.push('\n');
    }
    Ok(buf)
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    write_string(path, &to_jsonl_string(records)?)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
