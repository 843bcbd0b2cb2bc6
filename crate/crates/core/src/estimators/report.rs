use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Estimator;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub t: usize,
    /// `None` when the estimator has no value at `t` (UN beyond `k`, or a
    /// failed fit).
    pub p_hat: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    pub residual: Option<f64>,
    pub objective: Option<f64>,
    pub kkt: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub schema: u32,
    pub estimator: Estimator,
    pub source_k: usize,
    pub status: EstimateStatus,
    pub targets: Vec<TargetEstimate>,
    pub diagnostics: EstimateDiagnostics,
}

impl EstimatorReport {
    pub fn ok(estimator: Estimator, source_k: usize, targets: Vec<TargetEstimate>, diagnostics: EstimateDiagnostics) -> Self {
        Self { schema: REPORT_SCHEMA, estimator, source_k, status: EstimateStatus::Ok, targets, diagnostics }
    }

    pub fn failed(estimator: Estimator, source_k: usize, targets: &[usize], err: &Error) -> Self {
        let mut diagnostics = EstimateDiagnostics { warnings: vec![err.to_string()], ..Default::default() };
        if let Error::ConvergenceFailure { closest_feasible_anchor, diagnostics: solver, .. } = err {
            if let Some(a) = closest_feasible_anchor {
                diagnostics.warnings.push(format!("closest feasible anchor {a:.9}"));
            }
            if let Some(d) = solver {
                diagnostics.objective = Some(d.objective);
                diagnostics.kkt = Some(d.kkt_residual);
                diagnostics.residual = Some(d.feasibility);
            }
        }
        Self {
            schema: REPORT_SCHEMA,
            estimator,
            source_k,
            status: EstimateStatus::Failed,
            targets: targets.iter().map(|&t| TargetEstimate { t, p_hat: None }).collect(),
            diagnostics,
        }
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.targets.iter().find(|e| e.t == t).and_then(|e| e.p_hat)
    }
}

pub fn write_report_json(path: &Path, reports: &[EstimatorReport]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, reports)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// One row per target `t`, one column per estimator; missing values are
/// left empty.
pub fn curve_csv(reports: &[EstimatorReport]) -> Result<String> {
    let mut ts: Vec<usize> = reports.iter().flat_map(|r| r.targets.iter().map(|e| e.t)).collect();
    ts.sort_unstable();
    ts.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(reports.iter().map(|r| r.estimator.to_string()));
    w.write_record(&header)?;
    for t in ts {
        let mut row = vec![t.to_string()];
        row.extend(reports.iter().map(|r| r.get(t).map(|p| format!("{p:?}")).unwrap_or_default()));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_curve_csv(path: &Path, reports: &[EstimatorReport]) -> Result<()> {
    std::fs::write(path, curve_csv(reports)?)?;
    Ok(())
}
