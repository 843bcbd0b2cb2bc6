//! Numerical kernels: nonnegative least squares, concave maximization over
//! the (monotone) probability simplex, adaptive quadrature, bisection and
//! isotonic regression.
//!
//! All kernels are stateless and sum in a fixed order, so identical inputs
//! give bit-identical outputs.

mod isotonic;
mod nnls;
mod quadrature;
mod roots;
mod simplex;

pub use isotonic::isotonic_nondecreasing;
pub use nnls::{nnls_solve, nnls_solve_with, NnlsConfig, NnlsProblem, NnlsSolution};
pub use quadrature::{integrate, integrate_with, QuadConfig, QuadResult};
pub use roots::bisect;
pub use simplex::{
    simplex_maximize, ConcaveObjective, LinearBand, SimplexConstraints, SimplexOptions,
    SimplexProgram, SimplexSolution,
};

use serde::{Deserialize, Serialize};

/// What an iterative solver reports alongside its answer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub objective: f64,
    pub iterations: usize,
    /// Scale-free optimality residual (0 at an exact KKT point).
    pub kkt_residual: f64,
    /// Largest constraint violation of the returned point.
    pub feasibility: f64,
    pub converged: bool,
}
