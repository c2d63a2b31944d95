//! Tabular output: CSV files with a `#`-prefixed provenance header and
//! pretty-printed JSON summaries. Numbers are written with 17 significant
//! digits; non-finite values are rejected at write time (flagged rows must
//! use a status column instead).

use anyhow::{bail, Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One table cell: a finite number or a short status/label string.
#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Provenance stamped into every CSV header.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub command: String,
    pub config_hash: u64,
}

/// Column-typed table with finite-number enforcement.
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in {}", self.name);
        self.rows.push(row);
    }

    /// Render the CSV body (everything after the provenance header) — the
    /// part required to be byte-identical across thread counts.
    pub fn body(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            let mut fields = Vec::with_capacity(row.len());
            for cell in row {
                match cell {
                    Cell::Num(x) => {
                        if !x.is_finite() {
                            bail!("non-finite value in table {} row {i}", self.name);
                        }
                        fields.push(format!("{x:.16e}"));
                    }
                    Cell::Text(s) => {
                        if s.contains(',') || s.contains('\n') {
                            bail!("unquotable text cell in table {}", self.name);
                        }
                        fields.push(s.clone());
                    }
                }
            }
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        Ok(out)
    }

    /// Write `<dir>/<name>.csv` with the provenance header.
    pub fn write(&self, dir: &Path, prov: &Provenance) -> Result<PathBuf> {
        let mut text = String::new();
        writeln!(text, "# command: {}", prov.command).unwrap();
        writeln!(text, "# config-hash: {:016x}", prov.config_hash).unwrap();
        writeln!(text, "# version: {}", env!("CARGO_PKG_VERSION")).unwrap();
        text.push_str(&self.body()?);
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Write the JSON summary for a command.
pub fn write_summary(dir: &Path, command: &str, summary: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join(format!("{command}_summary.json"));
    let text = serde_json::to_string_pretty(summary)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
