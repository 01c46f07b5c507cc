use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::args::Format;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub schema_version: String,
    pub command: String,
    pub n: usize,
    pub inputs: BTreeMap<String, InputValue>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub timing_ms: u64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(untagged)]
pub enum InputValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    #[serde(with = "nullable")]
    pub lhs: f64,
    #[serde(with = "nullable")]
    pub rhs: f64,
    #[serde(with = "nullable")]
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Why a computation failed, or what limited it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), lhs, rhs, residual, tolerance, pass: residual <= tolerance, note: None }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, error: impl ToString) -> Self {
        Check {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            tolerance,
            pass: false,
            note: Some(error.to_string()),
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn tally(checks: &[Check]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Summary { total: checks.len(), passed, failed: checks.len() - passed }
    }
}

impl VerificationReport {
    pub fn new(command: String, n: usize, inputs: BTreeMap<String, InputValue>, checks: Vec<Check>) -> Self {
        let summary = Summary::tally(&checks);
        VerificationReport {
            schema_version: SCHEMA_VERSION.to_string(),
            command,
            n,
            inputs,
            checks,
            summary,
            timing_ms: 0,
        }
    }
}

/// Non-finite values travel as `null`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Seventeen significant digits in scientific notation; round-trips every f64.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Pretty JSON whose floats are written by [`format_f64`].
struct FullPrecision(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(format_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(report: &VerificationReport) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FullPrecision(serde_json::ser::PrettyFormatter::new()));
    report.serialize(&mut ser).expect("reports serialize to memory");
    buf.push(b'\n');
    buf
}

pub fn from_json(bytes: &[u8]) -> serde_json::Result<VerificationReport> {
    serde_json::from_slice(bytes)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Rows of floats with a header, LF line endings.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| format_f64(*v))).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn to_csv(report: &VerificationReport) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    w.write_record(["name", "lhs", "rhs", "residual", "tolerance", "pass"]).expect("in-memory write");
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            format_f64(c.lhs),
            format_f64(c.rhs),
            format_f64(c.residual),
            format_f64(c.tolerance),
            c.pass.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn render(report: &VerificationReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

/// `emit_report`: to `path`, or standard output when `None`.
pub fn emit_report(report: &VerificationReport, format: Format, path: Option<&std::path::Path>) -> io::Result<()> {
    let bytes = render(report, format);
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()
        }
    }
}
