//! LUT-library manifest: JSON-lines of `{id, path, source_tag}`.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Filter,
    Expert,
    Fuse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub id: String,
    pub path: String,
    pub source_tag: SourceTag,
}

pub fn write_manifest<W: Write>(mut w: W, entries: &[LibraryEntry]) -> Result<()> {
    for e in entries {
        let line = serde_json::to_string(e)
            .map_err(|err| Error::Format(format!("manifest serialize: {err}")))?;
        writeln!(w, "{line}").map_err(|err| Error::io("manifest", err))?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(r: R) -> Result<Vec<LibraryEntry>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("read failure: {e}"),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LibraryEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("bad manifest line: {e}"),
        })?;
        out.push(entry);
    }
    Ok(out)
}

pub fn read_manifest_file(path: impl AsRef<Path>) -> Result<Vec<LibraryEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    read_manifest(std::io::BufReader::new(file))
}
