//! Lawson-Hanson active-set solver for `min ||A x - b||^2` subject to `x >= 0`.

use nalgebra::{DMatrix, DVector};

use super::SolverDiagnostics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl NnlsProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::invalid("NNLS design needs at least one row and one column"));
        }
        if a.nrows() != b.len() {
            return Err(Error::invalid(format!(
                "NNLS design has {} rows but target has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("NNLS inputs must be finite"));
        }
        Ok(Self { a, b })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.b
    }

    /// `A^T (b - A x)`, the negative half-gradient.
    fn dual(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.b - &self.a * x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnlsConfig {
    pub tol: f64,
    /// Outer iteration cap; `None` means ten times the column count.
    pub max_iter: Option<usize>,
}

impl Default for NnlsConfig {
    fn default() -> Self {
        Self { tol: 1e-14, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub diagnostics: SolverDiagnostics,
}

pub fn nnls_solve(p: &NnlsProblem) -> Result<NnlsSolution> {
    nnls_solve_with(p, &NnlsConfig::default())
}

/// Least squares restricted to the columns in `support`.
fn solve_support(a: &DMatrix<f64>, b: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(support);
    let svd = sub.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-13 * support.len().max(a.nrows()) as f64;
    svd.solve(b, cutoff).expect("SVD computed with both factors")
}

pub fn nnls_solve_with(p: &NnlsProblem, cfg: &NnlsConfig) -> Result<NnlsSolution> {
    let n = p.a.ncols();
    let max_iter = cfg.max_iter.unwrap_or(10 * n).max(1);
    // Dual values are compared against a tolerance scaled to the problem.
    let scale = p.a.tr_mul(&p.b).amax().max(p.a.amax() * p.a.amax()).max(1.0);
    let tol = cfg.tol * scale;

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose entry immediately failed because of numerical dependence;
    // cleared whenever the iterate moves.
    let mut blocked = vec![false; n];
    let mut iterations = 0;

    loop {
        let w = p.dual(&x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !blocked[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate.filter(|&j| w[j] > tol) else {
            break;
        };
        if iterations >= max_iter {
            let diagnostics = report(p, &x, iterations, false, tol);
            return Err(Error::MaxIterations { best: x.iter().copied().collect(), diagnostics: Box::new(diagnostics) });
        }
        iterations += 1;
        passive[j] = true;

        let mut first = true;
        loop {
            let support: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s = solve_support(&p.a, &p.b, &support);
            if support.iter().zip(s.iter()).all(|(_, &v)| v > 0.0) {
                for (&i, &v) in support.iter().zip(s.iter()) {
                    x[i] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            if first {
                let pos = support.iter().position(|&i| i == j).unwrap();
                if s[pos] <= 0.0 {
                    // the new column adds nothing the support cannot already express
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            }
            first = false;
            // step from x toward s until the first passive coordinate hits zero
            let mut alpha = 1.0f64;
            for (&i, &si) in support.iter().zip(s.iter()) {
                if si <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - si));
                }
            }
            for (&i, &si) in support.iter().zip(s.iter()) {
                x[i] += alpha * (si - x[i]);
                if x[i] <= tol * 1e-6 || si <= 0.0 && x[i] <= f64::EPSILON * 16.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !support.iter().any(|&i| !passive[i]) {
                // guard: drop the most negative coordinate so progress is made
                let (k, _) = support
                    .iter()
                    .zip(s.iter())
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                x[*k] = 0.0;
                passive[*k] = false;
            }
            blocked.iter_mut().for_each(|b| *b = false);
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
    }
    let diagnostics = report(p, &x, iterations, true, tol);
    Ok(NnlsSolution {
        residual_norm: (&p.a * &x - &p.b).norm(),
        x: x.iter().copied().collect(),
        diagnostics,
    })
}

fn report(p: &NnlsProblem, x: &DVector<f64>, iterations: usize, converged: bool, tol: f64) -> SolverDiagnostics {
    let grad = -p.dual(x);
    // KKT: positive coordinates have zero gradient, zero ones nonnegative gradient
    let kkt = (0..x.len())
        .map(|i| if x[i] > 0.0 { grad[i].abs() } else { (-grad[i]).max(0.0) })
        .fold(0.0, f64::max);
    let r = &p.a * x - &p.b;
    SolverDiagnostics {
        objective: r.norm_squared(),
        iterations,
        kkt_residual: kkt,
        feasibility: x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max),
        converged: converged && kkt <= 10.0 * tol.max(1e-300),
    }
}
