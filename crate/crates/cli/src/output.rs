//! CSV rendering and all-or-nothing file emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Shortest decimal string that parses back to the same `f64`.
pub fn real(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

/// A CSV document whose first line is a `#` comment with the resolved config.
pub struct Table {
    comment: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<C: Serialize>(config: &C, command: &str, header: &[&str]) -> Result<Self, CliError> {
        let resolved = serde_json::to_string(config).map_err(|e| CliError::Io(e.to_string()))?;
        let comment = format!("# {BUILD_ID} {command} config={resolved}\n");
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { comment, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u8>, CliError> {
        let body = self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let mut out = self.comment.into_bytes();
        out.extend(body);
        Ok(out)
    }
}

/// Files produced by one run, held in memory until the run has succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    /// Writes every file to a temporary name in `dir`, then renames them all.
    /// Nothing lands under its final name unless every write succeeded.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::Builder::new().prefix(".momentchain-").tempfile_in(dir)?;
            tmp.write_all(contents)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| CliError::Io(e.to_string()))?;
            written.push(target);
        }
        Ok(written)
    }
}
