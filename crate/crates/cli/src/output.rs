//! Artifact rendering and atomic file emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the raw configuration bytes.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One output file, rendered in memory before it touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

/// CSV table whose first line is a `#` comment carrying provenance.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    header: String,
}

impl CsvTable {
    pub fn new(columns: &[&str], config_sha256: &str) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns).expect("in-memory write");
        Self { writer, header: format!("# kerrbit {TOOL_VERSION} config_sha256={config_sha256}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self, file_name: impl Into<String>) -> Artifact {
        let body = String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("CSV is UTF-8");
        Artifact { file_name: file_name.into(), contents: self.header + &body }
    }
}

/// Shortest round-trip decimal; non-finite values print as `NaN`, `inf`, `-inf`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes via a temporary file in the target directory and renames it into place.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(&artifact.file_name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(artifact.contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}
