//! Verification reports and their CSV / JSON serializations.
//!
//! Rows carry a verdict: `pass` / `fail` for internal-consistency checks and
//! `discrepancy-logged` for comparisons against quoted values or printed
//! closed forms that the oracles do not reproduce. Only `fail` rows affect
//! the exit status.

use std::fmt;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

pub const CSV_HEADER: [&str; 5] = ["check", "location", "value", "tolerance", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    DiscrepancyLogged,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::Pass, Verdict::Fail, Verdict::DiscrepancyLogged];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::DiscrepancyLogged => "discrepancy-logged",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == token)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check: String,
    pub location: String,
    pub value: f64,
    /// `NaN` for rows that only record a value.
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Parameters echoed into the JSON `meta` block. Non-finite entries (sweeps)
/// serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportMeta {
    pub lambda: f64,
    pub xi: f64,
    pub a: f64,
}

impl ReportMeta {
    pub fn new(lambda: f64, xi: f64) -> Self {
        Self { lambda, xi, a: (3.0 / lambda).sqrt() }
    }

    pub fn unset() -> Self {
        Self { lambda: f64::NAN, xi: f64::NAN, a: f64::NAN }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn new(meta: ReportMeta) -> Self {
        Self { meta, rows: Vec::new() }
    }

    pub fn push(&mut self, check: impl Into<String>, location: impl Into<String>, value: f64, tolerance: f64, verdict: Verdict) {
        self.rows.push(ReportRow { check: check.into(), location: location.into(), value, tolerance, verdict });
    }

    /// Internal check: passes iff `|value| <= tolerance`.
    pub fn check(&mut self, check: impl Into<String>, location: impl Into<String>, value: f64, tolerance: f64) {
        let ok = value.abs() <= tolerance;
        self.check_that(check, location, value, tolerance, ok);
    }

    pub fn check_that(&mut self, check: impl Into<String>, location: impl Into<String>, value: f64, tolerance: f64, ok: bool) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.push(check, location, value, tolerance, verdict);
    }

    /// Comparison against a quoted value: `pass` on agreement, otherwise
    /// `discrepancy-logged`.
    pub fn compare(&mut self, check: impl Into<String>, location: impl Into<String>, value: f64, tolerance: f64, agrees: bool) {
        let verdict = if agrees { Verdict::Pass } else { Verdict::DiscrepancyLogged };
        self.push(check, location, value, tolerance, verdict);
    }

    /// A recorded quantity with no acceptance band.
    pub fn record(&mut self, check: impl Into<String>, location: impl Into<String>, value: f64) {
        self.push(check, location, value, f64::NAN, Verdict::Pass);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn all_internal_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn rows_named<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }
}

/// 17 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn emit_csv<W: Write>(report: &VerificationReport, out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        w.write_record([
            row.check.as_str(),
            row.location.as_str(),
            &format_value(row.value),
            &format_value(row.tolerance),
            row.verdict.as_str(),
        ])?;
    }
    w.flush()
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn to_json(report: &VerificationReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "check": r.check,
                "location": r.location,
                "value": number(r.value),
                "tolerance": number(r.tolerance),
                "verdict": r.verdict.as_str(),
            })
        })
        .collect();
    let mut meta = Map::new();
    meta.insert("a".into(), number(report.meta.a));
    meta.insert("lambda".into(), number(report.meta.lambda));
    meta.insert("tool_version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    meta.insert("xi".into(), number(report.meta.xi));
    json!({ "meta": Value::Object(meta), "rows": rows })
}

pub fn emit_json<W: Write>(report: &VerificationReport, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(report))?;
    out.write_all(b"\n")?;
    out.flush()
}
