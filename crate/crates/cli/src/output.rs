//! CSV tables with a commented metadata header.
//!
//! ```text
//! # floquet-aah 0.1.0
//! # command: spectrum
//! # eta: 1e-6
//! # --- config ---
//! # [model]
//! # ...
//! # --- end config ---
//! lambda,eps_real,eps_imag,ipr,residual
//! 0,-1.93,0,0.0021,3.1e-15
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a value back
//! gives the same `f64`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::config::{Resolved, CONFIG_BEGIN, CONFIG_END};
use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` header lines (summaries, matching rules, failures).
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn render(run: &Resolved, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# floquet-aah {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command: {}", run.command.name());
    let _ = writeln!(s, "# eta: {}", num(run.search.eta));
    for (k, v) in &table.notes {
        let _ = writeln!(s, "# {k}: {v}");
    }
    let _ = writeln!(s, "{CONFIG_BEGIN}");
    for line in run.echo_toml().lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            let _ = writeln!(s, "# {line}");
        }
    }
    let _ = writeln!(s, "{CONFIG_END}");
    let _ = writeln!(s, "{}", table.columns.join(","));
    for row in &table.rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-6, 1.5603645752707958e-15, -3.25e20, 0.6931471805599453, 1e-4, f64::MAX] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(1e-6), "1e-6");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(f64::NAN), "NaN");
    }
}
