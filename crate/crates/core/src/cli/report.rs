use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::CliError;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// One row of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for informational rows.
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    /// Pass when `value <= threshold`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        let pass = value <= threshold;
        self.checks.push(Check { name: name.into(), value, threshold: Some(threshold), pass });
    }

    /// Pass when `value >= threshold`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        let pass = value >= threshold;
        self.checks.push(Check { name: name.into(), value, threshold: Some(threshold), pass });
    }

    /// Pass when `value` lies in `[lo, hi]`; the threshold column shows `hi`.
    pub fn within(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        let pass = value >= lo && value <= hi;
        self.checks.push(Check { name: name.into(), value, threshold: Some(hi), pass });
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.checks.push(Check { name: name.into(), value, threshold: None, pass: true });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,threshold,pass\n");
        for c in &self.checks {
            let threshold = c.threshold.map_or_else(|| "-".to_string(), fmt_f64);
            let _ = writeln!(out, "{},{},{},{}", c.name, fmt_f64(c.value), threshold, c.pass);
        }
        out
    }
}

/// Writes a numeric CSV with the given header.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::with_capacity(rows.len() * 24 * rows.first().map_or(1, |r| r.len()));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}
