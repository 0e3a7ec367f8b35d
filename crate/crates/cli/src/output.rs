//! CSV and manifest writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Formats `v` with nine significant digits, `%.9g` style.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Comma-separated table with one header row and Unix newlines.
pub struct Csv {
    columns: usize,
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            columns: header.len(),
            buf,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&sig9(*v));
        }
        self.buf.push('\n');
    }

    /// Row whose leading columns are integers.
    pub fn row_with_index(&mut self, index: &[u64], values: &[f64]) {
        debug_assert_eq!(index.len() + values.len(), self.columns);
        let mut first = true;
        for i in index {
            if !first {
                self.buf.push(',');
            }
            first = false;
            let _ = write!(self.buf, "{i}");
        }
        for v in values {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(&sig9(*v));
        }
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.buf)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}

pub const MANIFEST_SCHEMA: &str = "colpitts-sync/manifest/v1";

/// Record written next to every output. Passing the manifest back through
/// `--config` reruns the same configuration.
#[derive(Debug, Serialize)]
pub struct RunManifest<R: Serialize> {
    pub schema: &'static str,
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<PathBuf>,
    pub results: R,
    pub wall_clock_seconds: f64,
}

impl<R: Serialize> RunManifest<R> {
    pub fn new(command: &str, config: &ExperimentConfig, outputs: Vec<PathBuf>, results: R, wall_clock_seconds: f64) -> Self {
        Self {
            schema: MANIFEST_SCHEMA,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            config: config.clone(),
            outputs,
            results,
            wall_clock_seconds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-270.0), "-270");
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig9(41.08363282462), "41.0836328");
        assert_eq!(sig9(1.4077e-7), "1.4077e-7");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
        assert_eq!(sig9(0.000123456789123), "0.000123456789");
        assert_eq!(sig9(f64::MAX), "1.79769313e308");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["stage", "cost"]);
        csv.row_with_index(&[1], &[0.5]);
        csv.row(&[2.0, 0.25]);
        assert_eq!(csv.as_str(), "stage,cost\n1,0.5\n2,0.25\n");
    }
}
