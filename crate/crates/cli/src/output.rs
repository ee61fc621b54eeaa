use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

/// Rows of strings for the table and CSV renderings.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))?;
        Ok(())
    }

    fn write_aligned<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(&self.header))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }

    /// One `key  value` line per column, for single-record reports.
    fn write_transposed<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let width = self.header.iter().map(|h| h.len()).max().unwrap_or(0);
        for row in &self.rows {
            for (k, v) in self.header.iter().zip(row) {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
        Ok(())
    }
}

/// What a subcommand hands back for printing.
pub struct Rendered {
    pub json: Value,
    pub table: Table,
    /// Print the table as key/value lines.
    pub single: bool,
}

pub fn emit<W: Write>(r: &Rendered, format: Format, out: &mut W) -> CliResult<()> {
    let io = |e| CliError::io("writing to stdout", e);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &r.json)?;
            writeln!(out).map_err(io)?;
        }
        Format::Csv => r.table.write_csv(&mut *out)?,
        Format::Table if r.single => r.table.write_transposed(out).map_err(io)?,
        Format::Table => r.table.write_aligned(out).map_err(io)?,
    }
    Ok(())
}

/// Writes `path` through a temporary file in the same directory, so a
/// failure never leaves partial output behind.
pub fn write_atomically<F>(path: &Path, fill: F) -> CliResult<()>
where
    F: FnOnce(&mut std::fs::File) -> CliResult<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::io(format!("creating temporary file in {}", dir.display()), e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut()
        .sync_all()
        .map_err(|e| CliError::io("flushing output", e))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(format!("renaming into {}", path.display()), e.error))?;
    Ok(())
}
