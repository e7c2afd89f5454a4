//! CSV tables and the run manifest.
//!
//! Every CSV starts with `#` comment lines holding the command and the full
//! resolved configuration (including the seed), followed by a header row.
//! `manifest.toml` holds the same configuration and can be passed back to
//! `--config` to reproduce the tables byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self::with_header(name, header.iter().map(|h| h.to_string()).collect())
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self { name: name.to_string(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Full-precision value (shortest round-trip representation).
pub fn raw(x: f64) -> String {
    format!("{x}")
}

/// dB value rounded to 0.01 dB.
pub fn round2(x: f64) -> String {
    format!("{x:.2}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn preamble(command: &str, cfg: &RunConfig) -> String {
    let mut text = format!("# mfrf {command} (version {})\n# seed = {}\n", env!("CARGO_PKG_VERSION"), cfg.seed);
    for line in cfg.to_toml().lines() {
        text.push_str("# ");
        text.push_str(line);
        text.push('\n');
    }
    text
}

/// Writes `manifest.toml` and one `<name>.csv` per table into `dir`.
pub fn write_outputs(dir: &Path, command: &str, cfg: &RunConfig, tables: &[Table]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let manifest = dir.join("manifest.toml");
    let text = format!("# mfrf {command} (version {})\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml());
    fs::write(&manifest, text).map_err(io_err(&manifest))?;
    let mut written = vec![manifest];

    let head = preamble(command, cfg);
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut file = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        file.write_all(head.as_bytes()).map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |source| CliError::Csv { path: path.clone(), source };
        w.write_record(&t.header).map_err(csv_err)?;
        for row in &t.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a table written by [`write_outputs`].
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?;
    let header = r
        .headers()
        .map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?
        .iter()
        .map(String::from)
        .collect();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let mut table = Table::with_header(name, header);
    for rec in r.records() {
        let rec = rec.map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?;
        table.rows.push(rec.iter().map(String::from).collect());
    }
    Ok(table)
}
