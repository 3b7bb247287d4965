//! Machine-readable run reports.
//!
//! Every command writes `<command>.json` and `<command>.csv` into the output
//! directory. The JSON report is a pure function of the resolved config and
//! seed, so reruns are byte-identical; wall time goes to a separate
//! `<command>.timing.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::VERSION;

pub const TOOL: &str = "tracial";

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TRACIAL_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Code {
    /// Malformed JSON or unknown fields.
    #[serde(rename = "input.json")]
    InputJson,
    /// Well-formed input violating a mathematical precondition.
    #[serde(rename = "input.invariant")]
    InputInvariant,
    #[serde(rename = "input.too_large")]
    InputTooLarge,
    #[serde(rename = "io")]
    Io,
    /// A check ran and its inequality failed.
    #[serde(rename = "numeric.check_failed")]
    NumericCheckFailed,
    /// An optimizer hit its budget or stalled; values are lower bounds.
    #[serde(rename = "numeric.unconverged")]
    NumericUnconverged,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::InputJson => "input.json",
            Code::InputInvariant => "input.invariant",
            Code::InputTooLarge => "input.too_large",
            Code::Io => "io",
            Code::NumericCheckFailed => "numeric.check_failed",
            Code::NumericUnconverged => "numeric.unconverged",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Code::NumericCheckFailed | Code::NumericUnconverged => 2,
            _ => 1,
        }
    }
}

impl From<&Error> for Code {
    fn from(e: &Error) -> Self {
        match e {
            Error::Json(_) | Error::Input(_) => Code::InputJson,
            Error::TooLarge(_) => Code::InputTooLarge,
            Error::Io(_) => Code::Io,
            Error::Shape(_)
            | Error::InvalidAlgebra(_)
            | Error::InvalidInclusion(_)
            | Error::NotSubalgebra(_)
            | Error::Precondition(_)
            | Error::Predicate(_) => Code::InputInvariant,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub results: Vec<Value>,
    pub diagnostics: Vec<Diagnostic>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config,
            seed,
            results: Vec::new(),
            diagnostics: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, result: impl Serialize) -> Result<()> {
        self.results.push(serde_json::to_value(result)?);
        Ok(())
    }

    pub fn flag(&mut self, code: Code, instance: Option<&str>, message: impl Into<String>) {
        self.passed = false;
        self.diagnostics.push(Diagnostic {
            code,
            instance: instance.map(str::to_string),
            message: message.into(),
        });
    }

    pub fn flag_error(&mut self, instance: Option<&str>, e: &Error) {
        self.flag(Code::from(e), instance, e.to_string());
    }

    /// 0 when everything passed, 1 if any input error occurred, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        self.diagnostics.iter().map(|d| d.code.exit_code()).fold(0, |acc, c| match (acc, c) {
            (1, _) | (_, 1) => 1,
            (a, b) => a.max(b),
        })
    }
}

/// A CSV table with fixed columns.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Shortest round-trip formatting (exponent form for very small or large
/// magnitudes), shared by all CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Serialize)]
struct Timing<'a> {
    command: &'a str,
    wall_seconds: f64,
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct Written {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
    pub timing: PathBuf,
}

/// Writes `<command>.json`, one CSV per table (`<command>.csv` for the
/// first, `<command>.<suffix>.csv` for the rest) and the timing sidecar.
pub fn write_outputs(
    dir: &Path,
    report: &Report,
    tables: &[(&str, &Table)],
    wall: Duration,
) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let cmd = &report.command;
    let report_path = dir.join(format!("{cmd}.json"));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&report_path, text)?;
    let mut written = Vec::new();
    for (suffix, table) in tables {
        let name = if suffix.is_empty() {
            format!("{cmd}.csv")
        } else {
            format!("{cmd}.{suffix}.csv")
        };
        let p = dir.join(name);
        fs::write(&p, table.to_bytes()?)?;
        written.push(p);
    }
    let timing = dir.join(format!("{cmd}.timing.json"));
    fs::write(
        &timing,
        serde_json::to_string_pretty(&Timing {
            command: cmd,
            wall_seconds: wall.as_secs_f64(),
        })? + "\n",
    )?;
    Ok(Written {
        report: report_path,
        tables: written,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let mut r = Report::new("x", Value::Null, 0);
        assert_eq!(r.exit_code(), 0);
        r.flag(Code::NumericUnconverged, None, "slow");
        assert_eq!(r.exit_code(), 2);
        r.flag(Code::InputInvariant, Some("a"), "bad");
        r.flag(Code::NumericCheckFailed, None, "bad");
        assert_eq!(r.exit_code(), 1);
        assert!(!r.passed);
    }

    #[test]
    fn csv_quotes_and_codes_serialize() {
        let mut t = Table::new(&["id", "value"]);
        t.row(vec!["a,b".into(), num(1e-8)]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "id,value\n\"a,b\",1e-8\n");
        assert_eq!(serde_json::to_string(&Code::InputTooLarge).unwrap(), "\"input.too_large\"");
        assert_eq!(Code::NumericCheckFailed.as_str(), "numeric.check_failed");
    }
}
