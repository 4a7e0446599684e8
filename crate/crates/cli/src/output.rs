//! CSV tables with `# key=value` metadata lines ahead of the header row.

use std::fs;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn extend_meta(&mut self, pairs: impl IntoIterator<Item = (String, String)>) -> &mut Self {
        self.meta.extend(pairs);
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.to_bytes()?)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    x.to_string()
}
