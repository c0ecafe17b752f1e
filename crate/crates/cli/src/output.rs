use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Top-level JSON document: provenance first, then the command payload.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, config: &'a RunConfig, result: T) -> Self {
        Self {
            schema: pdm_core::SCHEMA,
            version: pdm_core::VERSION,
            command,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// `#`-prefixed provenance lines shared by every CSV output.
pub fn csv_preamble(command: &str, config: &RunConfig) -> Result<Vec<String>> {
    Ok(vec![
        format!("pdm-spectra {} {command}", pdm_core::VERSION),
        format!("schema: {}", pdm_core::SCHEMA),
        format!("config: {}", serde_json::to_string(config)?),
    ])
}

pub fn csv_table(comments: &[String], columns: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in comments {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write via a temporary file in the target directory and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |context: String| move |source| CliError::Io { context, source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir)
        .map_err(io(format!("creating temp file in {}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(io(format!("writing {}", path.display())))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        context: format!("renaming into {}", path.display()),
        source: e.error,
    })?;
    Ok(())
}

/// To `--out` when given, else stdout.
pub fn emit(config: &RunConfig, contents: &str) -> Result<()> {
    match &config.out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
