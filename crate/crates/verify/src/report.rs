//! Suite reports and their text and structured (JSON) renderings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::manifest::{ANCHORS, PLUMBING};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub id: String,
    pub anchor: String,
    pub cases: usize,
    /// `None` when the suite errored or produced a non-finite residual.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SuiteReport {
    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub spec: String,
    pub seed: u64,
    /// Every anchor the suites are expected to cover.
    pub manifest: Vec<String>,
    /// Anchors of the suites in this report.
    pub covered: Vec<String>,
    /// Manifest anchors no reported suite covers.
    pub missing: Vec<String>,
    pub suites: Vec<SuiteReport>,
    pub all_passed: bool,
}

impl Report {
    pub fn new(spec: &str, seed: u64, mut suites: Vec<SuiteReport>) -> Report {
        suites.sort_by(|a, b| a.id.cmp(&b.id));
        let covered: BTreeSet<&str> = suites
            .iter()
            .map(|s| s.anchor.as_str())
            .filter(|a| *a != PLUMBING)
            .collect();
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            spec: spec.to_string(),
            seed,
            manifest: ANCHORS.iter().map(|s| s.to_string()).collect(),
            covered: ANCHORS
                .iter()
                .filter(|a| covered.contains(*a))
                .map(|s| s.to_string())
                .collect(),
            missing: ANCHORS
                .iter()
                .filter(|a| !covered.contains(*a))
                .map(|s| s.to_string())
                .collect(),
            all_passed: suites.iter().all(|s| s.passed),
            suites,
        }
    }

    pub fn failures(&self) -> usize {
        self.suites.iter().filter(|s| !s.passed).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => render_text(report),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

pub fn parse_structured(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"))
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let width = report
        .suites
        .iter()
        .map(|s| s.id.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let _ = writeln!(out, "spec {} (seed {})", report.spec, report.seed);
    let _ = writeln!(
        out,
        "{:<4}  {:<width$}  {:<8}  {:>5}  {:>10}  {:>10}  {:>9}",
        "", "suite", "anchor", "cases", "residual", "tolerance", "ms"
    );
    for s in &report.suites {
        let _ = writeln!(
            out,
            "{:<4}  {:<width$}  {:<8}  {:>5}  {:>10}  {:>10.3e}  {:>9.2}",
            s.verdict(),
            s.id,
            s.anchor,
            s.cases,
            fmt_residual(s.max_residual),
            s.tolerance,
            s.wall_time_ms
        );
        if let Some(d) = &s.detail {
            let _ = writeln!(out, "      {d}");
        }
    }
    let _ = writeln!(
        out,
        "{} suites, {} failed; anchors covered {}/{}",
        report.suites.len(),
        report.failures(),
        report.covered.len(),
        report.manifest.len()
    );
    out
}
