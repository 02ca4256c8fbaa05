//! Deterministic CSV rendering.

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Header and rows of one result table, plus run health counters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Rows whose computation failed numerically.
    pub failures: usize,
    /// Rows that violate a checked property.
    pub violations: usize,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.serialize().as_bytes()))
}

/// The table as CSV text, preceded by `#` metadata lines.
pub fn render(cfg: &RunConfig, table: &Table) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("# sdiv {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command: {}\n", cfg.command.as_str()));
    out.push_str(&format!("# config_sha256: {}\n", config_hash(cfg)));
    out.push_str(&format!("# seed: {}\n", cfg.seed));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// Parses text produced by [`render`]: metadata lines, header and rows.
pub fn read_table(text: &str) -> Result<(Vec<String>, Table), CliError> {
    let meta: Vec<String> = text.lines().take_while(|l| l.starts_with('#')).map(String::from).collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect();
    let mut table = Table { header, ..Table::default() };
    for rec in r.records() {
        table.rows.push(rec.map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect());
    }
    Ok((meta, table))
}
