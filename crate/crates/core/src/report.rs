//! Tabular experiment output shared by the library studies and the CLI.

use serde::{Deserialize, Serialize};

use crate::stats::SlopeFit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Series label, e.g. `f=sin` or `alpha=0.5`; never contains commas.
    pub param: String,
    /// Resolution: lattice `n`, step count, or grid spacing.
    pub n: f64,
    pub metric: String,
    pub value: f64,
    /// Monte Carlo standard error, 0 for deterministic values.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub param: String,
    pub metric: String,
    pub fit: SlopeFit,
}

/// A tolerance assertion evaluated by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitRow>,
    pub checks: Vec<Check>,
    pub config_echo: serde_json::Value,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            config_echo: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, param: impl Into<String>, n: f64, metric: impl Into<String>, value: f64, stderr: f64) {
        self.rows.push(ReportRow {
            param: param.into(),
            n,
            metric: metric.into(),
            value,
            stderr,
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// Rows of one series in insertion order.
    pub fn series(&self, param: &str, metric: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.param == param && r.metric == metric)
            .map(|r| (r.n, r.value))
            .collect()
    }

    /// Fits a log-log slope to a series; recorded only when it has at least
    /// four positive points.
    pub fn fit_series(&mut self, param: &str, metric: &str) -> Option<SlopeFit> {
        let pts = self.series(param, metric);
        let fit = crate::stats::fit_slope(&pts).ok()?;
        self.fits.push(FitRow {
            param: param.to_string(),
            metric: metric.to_string(),
            fit,
        });
        Some(fit)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
