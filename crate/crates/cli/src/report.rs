use serde::{Deserialize, Serialize};
use vlab_core::matcore::csv::format_float;
use vlab_core::residual::{ConvergenceTable, Tier};

use crate::catalog::{Catalog, CatalogEntry};
use crate::checks::{measure, Ctx, Measured};
use crate::config::SuiteConfig;
use crate::error::CliError;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Report,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub paper_eq: String,
    pub tier: Tier,
    /// `null` when the check errored.
    pub residual: f64,
    pub tolerance: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    /// Failures that set exit status 1: any failed exact or convergent
    /// check, and any report-only diagnostic that errored or produced a
    /// malformed table.
    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail || self.error.is_some()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub version: u32,
    pub params: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub tables: Vec<ConvergenceTable>,
}

impl SuiteReport {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.checks.iter().any(CheckResult::is_failure))
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        (count(Status::Pass), count(Status::Fail), count(Status::Report))
    }
}

fn judge(
    entry: &CatalogEntry,
    cfg: &SuiteConfig,
    outcome: vlab_core::Result<Measured>,
) -> (CheckResult, Vec<ConvergenceTable>) {
    let tolerance = entry.effective_tolerance(cfg.tolerances.get(&entry.id).copied(), cfg.dim);
    let mut result = CheckResult {
        id: entry.id.clone(),
        paper_eq: entry.paper_eq.clone(),
        tier: entry.tier,
        residual: f64::NAN,
        tolerance,
        status: Status::Report,
        fallback_pass: None,
        error: None,
    };
    let tables = match outcome {
        Ok(m) => {
            result.residual = m.residual;
            result.fallback_pass = m.fallback;
            if let Some(bad) = m.tables.iter().find(|t| !t.is_well_formed()) {
                result.error = Some(format!("malformed table `{}`", bad.id));
            }
            m.tables
        }
        Err(e) => {
            result.error = Some(e.to_string());
            Vec::new()
        }
    };
    if let Some(tol) = tolerance {
        let direct = result.error.is_none() && entry.passes(result.residual, tol);
        let ok =
            direct || (entry.tier == Tier::Convergent && result.error.is_none() && result.fallback_pass == Some(true));
        result.status = if ok { Status::Pass } else { Status::Fail };
    }
    (result, tables)
}

/// Runs every check of the configured suite, one thread per check, and
/// assembles the results in catalog order.
pub fn run_suite(cfg: &SuiteConfig, catalog: &Catalog) -> Result<SuiteReport, CliError> {
    let ctx = Ctx { sector: cfg.sector()?, w: cfg.window(), omega: cfg.omega() };
    let entries: Vec<&CatalogEntry> = catalog.select(cfg.suite).collect();
    let outcomes: Vec<vlab_core::Result<Measured>> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries.iter().map(|e| scope.spawn(|| measure(&e.id, &ctx))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(vlab_core::VlabError::InvalidParameter("check panicked".into()))))
            .collect()
    });
    let mut checks = Vec::with_capacity(entries.len());
    let mut tables = Vec::new();
    for (entry, outcome) in entries.into_iter().zip(outcomes) {
        let (result, t) = judge(entry, cfg, outcome);
        checks.push(result);
        tables.extend(t);
    }
    Ok(SuiteReport { version: REPORT_VERSION, params: cfg.clone(), checks, tables })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        String::new()
    }
}

fn tier_name(t: Tier) -> &'static str {
    match t {
        Tier::Exact => "exact",
        Tier::Convergent => "convergent",
        Tier::ReportOnly => "report_only",
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Report => "report",
    }
}

pub const REPORT_CSV_HEADER: &str = "id,tier,residual,tolerance,status,error,paper_eq";

/// Check rows, optionally prefixed by a sweep value column.
pub fn report_csv_rows(r: &SuiteReport, prefix: Option<f64>) -> String {
    let mut out = String::new();
    for c in &r.checks {
        if let Some(v) = prefix {
            out.push_str(&format_float(v));
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.id,
            tier_name(c.tier),
            csv_float(c.residual),
            c.tolerance.map(csv_float).unwrap_or_default(),
            status_name(c.status),
            csv_field(c.error.as_deref().unwrap_or("")),
            csv_field(&c.paper_eq),
        ));
    }
    out
}

pub fn report_csv(r: &SuiteReport) -> String {
    format!("{REPORT_CSV_HEADER}\n{}", report_csv_rows(r, None))
}

pub fn report_json(r: &SuiteReport) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

/// Per-check residuals along a sweep, with the empirical order between
/// consecutive values.
pub fn trend_csv(values: &[f64], reports: &[SuiteReport]) -> String {
    let mut out = String::from("value,check_id,residual,order\n");
    let Some(first) = reports.first() else { return out };
    for (idx, check) in first.checks.iter().enumerate() {
        let points: Vec<(f64, f64)> = values.iter().zip(reports).map(|(v, r)| (*v, r.checks[idx].residual)).collect();
        let table = ConvergenceTable::new(check.id.clone(), "", &points);
        for row in &table.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_float(row.value),
                check.id,
                csv_float(row.residual),
                row.order.map(csv_float).unwrap_or_default()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn nonfinite_fields_are_empty() {
        assert_eq!(csv_float(f64::NAN), "");
        assert_eq!(csv_float(1.0), "1.0000000000000000e0");
    }
}
