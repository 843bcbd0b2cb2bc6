use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::SolverDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact score tie involving the true class was found under the strict
    /// tie policy.
    #[error("{count} exact score tie(s) involving the true class (strict tie policy)")]
    TieDetected { count: usize },

    #[error("class {class} has no test points")]
    MissingClass { class: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The constrained pseudolikelihood solve did not produce a usable
    /// estimate. `closest_feasible_anchor` is set when the anchor moment lies
    /// outside what any monotone density on the grid can reach.
    #[error("convergence failure: {reason}")]
    ConvergenceFailure {
        reason: String,
        closest_feasible_anchor: Option<f64>,
        diagnostics: Option<Box<SolverDiagnostics>>,
    },

    #[error("iteration cap reached ({}) with KKT residual {:.3e}", .diagnostics.iterations, .diagnostics.kkt_residual)]
    MaxIterations {
        best: Vec<f64>,
        diagnostics: Box<SolverDiagnostics>,
    },

    #[error("start point is not strictly feasible: {0}")]
    InfeasibleStart(String),

    #[error("quadrature tolerance not met: estimate {estimate}, error bound {error_bound:.3e}")]
    ToleranceNotMet { estimate: f64, error_bound: f64 },

    #[error("root not bracketed: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { f_lo: f64, f_hi: f64 },

    #[error("covariance estimate is singular (training size {train_size}, dimension {dim})")]
    SingularCovariance { train_size: usize, dim: usize },

    #[error("{}:{line}:{column}: {message}", .file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration invalid:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::ConvergenceFailure { .. } | Error::MaxIterations { .. })
    }
}
