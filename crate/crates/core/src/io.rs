//! File helpers shared by every on-disk format.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to a temp file next to `path` and renames it into place,
/// so readers never observe a partially written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let write_err = |source: std::io::Error| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(write_err)?;
    tmp.write_all(contents).map_err(write_err)?;
    tmp.flush().map_err(write_err)?;
    tmp.persist(path).map_err(|e| write_err(e.error))?;
    Ok(())
}

/// Rounds to the 6-decimal grid used by the line-delimited formats.
pub fn quantize6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error_lite(de, what)
}

// serde_json reports line/column but not the field path; include the document
// kind and location so diagnostics point at the offending spot.
fn serde_path_to_error_lite<'de, T: serde::Deserialize<'de>>(
    de: &mut serde_json::Deserializer<serde_json::de::StrRead<'de>>,
    what: &str,
) -> Result<T> {
    let value = T::deserialize(&mut *de).map_err(|e| {
        Error::schema(
            format!("{what}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    de.end()
        .map_err(|e| Error::schema(format!("{what}:{}:{}", e.line(), e.column()), e.to_string()))?;
    Ok(value)
}
