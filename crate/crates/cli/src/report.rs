//! JSON envelopes and plain-text tables.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use fpanel_core::mcstudy::CltSummary;
use fpanel_core::{StudyResult, TestReport};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Versioned wrapper for every JSON document the CLI writes. `timestamp`
/// (seconds since the Unix epoch) is the only nondeterministic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub schema_version: u32,
    pub command: String,
    pub timestamp: u64,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &str, config: C, result: R) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            timestamp,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }
}

/// Parses a document and drops its timestamp, for determinism comparisons.
pub fn without_timestamp(json: &str) -> serde_json::Result<serde_json::Value> {
    let mut v: serde_json::Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timestamp");
    }
    Ok(v)
}

pub fn format_p_value(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

pub fn render_test_table(report: &TestReport) -> String {
    let mut out = String::new();
    let per_series: Vec<String> = report.p_per_series.iter().map(|p| p.to_string()).collect();
    writeln!(
        out,
        "I = {}, N = {}, p(i) = [{}], p_N = {}, q = {}{}",
        report.n_series,
        report.n,
        per_series.join(", "),
        report.p_n,
        report.q,
        if report.detrended { ", detrended" } else { "" }
    )
    .unwrap();
    writeln!(
        out,
        "alpha = {}, reject when z_H > {:.4}",
        report.alpha, report.critical_value
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:>3}  {:>14}  {:>10}  {:>8}  verdict",
        "H", "Q_N", "z_H", "p-value"
    )
    .unwrap();
    for row in &report.rows {
        writeln!(
            out,
            "{:>3}  {:>14.4}  {:>10.3}  {:>8}  {}",
            row.h,
            row.statistic,
            row.normalized,
            format_p_value(row.p_value),
            if row.reject { "reject" } else { "-" }
        )
        .unwrap();
    }
    out
}

pub fn render_study_table(result: &StudyResult) -> String {
    let s = &result.scenario;
    let mut out = format!(
        "{:?}: I = {}, N = {}, rho = {}, alpha = {}, R = {}, seed = {}\n",
        s.kind, s.n_series, s.n, s.rho, s.alpha, s.replications, s.seed
    );
    writeln!(out, "{:>3}  {:>9}  {:>17}", "H", "frequency", "CI").unwrap();
    for row in &result.rows {
        writeln!(
            out,
            "{:>3}  {:>9.3}  ({:.3}, {:.3})",
            row.h, row.frequency, row.lo, row.hi
        )
        .unwrap();
    }
    out
}

pub fn render_clt(summary: &CltSummary) -> String {
    let mut out = format!(
        "p = {}, N = {}, H = {}, R = {}\nmean = {:.4}\n",
        summary.p, summary.n, summary.h, summary.replications, summary.mean
    );
    match (summary.sd, summary.ks_distance) {
        (Some(sd), Some(ks)) => {
            writeln!(out, "sd = {sd:.4}\nKS distance to N(0,1) = {ks:.4}").unwrap()
        }
        _ => writeln!(out, "sd and KS distance need at least two replications").unwrap(),
    }
    if summary.underpowered {
        writeln!(out, "warning: fewer than 100 replications").unwrap();
    }
    out
}
