//! Report rows, run manifests and the exit-code rule.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use supercong::arith::fmt_rational;
use supercong::report::Instance;
use supercong::CongruenceReport;

use crate::args::Format;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// How one instance ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// A detector whose necessary condition failed: informative, not a violation.
    DetectorFails,
    /// A failure outside the verified hypothesis range.
    AdvisoryFails,
    /// Outside the statement's hypotheses or the run budget; nothing was checked.
    Skipped,
    Error,
    /// A value was produced; no congruence was involved.
    Computed,
}

impl Verdict {
    pub fn of(report: &CongruenceReport) -> Verdict {
        if report.holds {
            Verdict::Holds
        } else if report.statement.is_detector() {
            Verdict::DetectorFails
        } else if report.advisory {
            Verdict::AdvisoryFails
        } else {
            Verdict::Fails
        }
    }
}

/// 1 if any check failed or could not be evaluated, else 0.
pub fn exit_code(verdicts: &[Verdict]) -> u8 {
    if verdicts.iter().any(|v| matches!(v, Verdict::Fails | Verdict::Error)) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

/// Summary of one run. Apart from `wall_time_ms` it depends only on the
/// command, its configuration and the results.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub version: &'static str,
    pub wall_time_ms: u128,
    pub instances: usize,
    pub tallies: BTreeMap<Verdict, usize>,
    /// Detector rows whose necessary condition holds: candidates worth a look.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub attention: Vec<Instance>,
    pub exit_code: u8,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, verdicts: &[Verdict]) -> Self {
        let mut tallies = BTreeMap::new();
        for &v in verdicts {
            *tallies.entry(v).or_insert(0) += 1;
        }
        RunManifest {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_ms: 0,
            instances: verdicts.len(),
            tallies,
            attention: Vec::new(),
            exit_code: exit_code(verdicts),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

const CSV_HEADER: &str = "statement,d,p,k,chi,lhs,rhs,depth,difference_valuation,holds,advisory";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &CongruenceReport) -> String {
    let v = r.difference_valuation.finite().map(|v| v.to_string()).unwrap_or_else(|| "inf".into());
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.statement,
        opt(r.instance.d),
        r.instance.p,
        opt(r.instance.k),
        opt(r.instance.chi),
        fmt_rational(&r.lhs),
        fmt_rational(&r.rhs),
        r.depth,
        v,
        r.holds,
        r.advisory
    )
}

/// Write reports in canonical order, one per line.
pub fn write_reports(out: &mut dyn Write, format: Format, reports: &[CongruenceReport]) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in reports {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in reports {
                writeln!(out, "{}", csv_row(r))?;
            }
        }
    }
    Ok(())
}

/// Generic rows (Bernoulli values, coefficient bundles, Table 1) as JSON
/// lines or CSV with the given column order.
pub fn write_rows(out: &mut dyn Write, format: Format, columns: &[&str], rows: &[serde_json::Value]) -> io::Result<()> {
    match format {
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut *out, row)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            writeln!(out, "{}", columns.join(","))?;
            for row in rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| match &row[*c] {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
    }
    Ok(())
}
