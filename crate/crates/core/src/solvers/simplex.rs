//! Concave maximization over the probability simplex, optionally restricted
//! to nondecreasing weight vectors and to one linear band `lo <= c.w <= hi`.
//!
//! Nondecreasing simplex vectors are exactly the mixtures of "suffix-uniform"
//! vectors (uniform mass on cells `s..M`), so the monotone case is solved in
//! those mixture coordinates, which again live on a plain simplex.
//!
//! Objectives that expose low-rank curvature (sums of logs of linear forms)
//! are solved by a primal log-barrier Newton method whose barrier parameter
//! bounds the duality gap. Others use exponentiated-gradient (entropic
//! mirror) ascent with a backtracking step; there the band is enforced after
//! every step by the exact KL projection, an exponential tilt
//! `lambda_s * exp(mu c_s)` with `mu` found by a safeguarded Newton search.

use nalgebra::{DMatrix, DVector};

use super::{isotonic_nondecreasing, SolverDiagnostics};
use crate::error::{Error, Result};

/// A concave function of the weight vector with an analytic gradient.
pub trait ConcaveObjective {
    /// Returns the value at `w` and writes the gradient into `grad`.
    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, w: &[f64]) -> f64 {
        let mut g = vec![0.0; w.len()];
        self.value_and_gradient(w, &mut g)
    }

    /// Hessian at `w` as `-sum_i s_i u_i u_i^T` with `s_i >= 0`, when the
    /// objective can supply it cheaply.
    fn curvature(&self, _w: &[f64]) -> Option<Vec<(f64, Vec<f64>)>> {
        None
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> f64> ConcaveObjective for F {
    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        self(w, grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearBand {
    pub coeffs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl LinearBand {
    pub fn eval(&self, w: &[f64]) -> f64 {
        self.coeffs.iter().zip(w).map(|(c, x)| c * x).sum()
    }

    fn violation(&self, w: &[f64]) -> f64 {
        let v = self.eval(w);
        (self.lo - v).max(v - self.hi).max(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimplexConstraints {
    pub monotone: bool,
    pub band: Option<LinearBand>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Relative objective tolerance: stop when the duality gap, or the
    /// objective increase over one sweep, falls below `rel_tol * max(1, |f|)`.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub sweep: usize,
    /// A point violating a constraint by more than this is infeasible.
    pub feas_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, max_iter: 50_000, sweep: 200, feas_tol: 1e-8 }
    }
}

pub struct SimplexProgram<O> {
    pub objective: O,
    pub constraints: SimplexConstraints,
    pub options: SimplexOptions,
}

impl<O: ConcaveObjective> SimplexProgram<O> {
    pub fn new(objective: O, constraints: SimplexConstraints) -> Self {
        Self { objective, constraints, options: SimplexOptions::default() }
    }

    pub fn with_options(mut self, options: SimplexOptions) -> Self {
        self.options = options;
        self
    }

    /// Largest violation of simplex, monotonicity and band constraints.
    pub fn infeasibility(&self, w: &[f64]) -> f64 {
        let mut worst = (w.iter().sum::<f64>() - 1.0).abs();
        worst = worst.max(w.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max));
        if self.constraints.monotone {
            worst = worst.max(w.windows(2).map(|p| (p[0] - p[1]).max(0.0)).fold(0.0, f64::max));
        }
        if let Some(band) = &self.constraints.band {
            worst = worst.max(band.violation(w));
        }
        worst
    }
}

impl SimplexConstraints {
    /// Builds a feasible weight vector from positive mixture weights: the
    /// weights of suffix-uniform vectors when monotone, of unit vectors
    /// otherwise. The mixture is tilted onto the band if one is set.
    /// Returns `None` when the band cannot be reached.
    pub fn feasible_point(&self, mixture: &[f64]) -> Option<Vec<f64>> {
        let m = mixture.len();
        let param = Param { monotone: self.monotone, m };
        let mut theta: Vec<f64> = mixture.iter().map(|v| v.max(1e-300).ln()).collect();
        let z = log_sum_exp(&theta);
        theta.iter_mut().for_each(|t| *t -= z);
        if let Some(b) = &self.band {
            let mut c = vec![0.0; m];
            param.pull_back(&b.coeffs, &mut c);
            if !project_band(&mut theta, &c, b.lo, b.hi) {
                return None;
            }
        }
        let lambda: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let mut w = vec![0.0; m];
        param.to_weights(&lambda, &mut w);
        Some(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub weights: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

/// Mixture coordinates: `w = B lambda`. Identity unless monotone.
struct Param {
    monotone: bool,
    m: usize,
}

impl Param {
    fn to_weights(&self, lambda: &[f64], w: &mut [f64]) {
        if !self.monotone {
            w.copy_from_slice(lambda);
            return;
        }
        let mut acc = 0.0;
        for s in 0..self.m {
            acc += lambda[s] / (self.m - s) as f64;
            w[s] = acc;
        }
    }

    /// `B^T g`.
    fn pull_back(&self, g: &[f64], out: &mut [f64]) {
        if !self.monotone {
            out.copy_from_slice(g);
            return;
        }
        let mut acc = 0.0;
        for s in (0..self.m).rev() {
            acc += g[s];
            out[s] = acc / (self.m - s) as f64;
        }
    }

    fn from_weights(&self, w: &[f64]) -> Vec<f64> {
        if !self.monotone {
            return w.to_vec();
        }
        let mut prev = 0.0;
        (0..self.m)
            .map(|s| {
                let l = (w[s] - prev) * (self.m - s) as f64;
                prev = w[s];
                l.max(0.0)
            })
            .collect()
    }
}

fn log_sum_exp(x: &[f64]) -> f64 {
    let mx = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + x.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
}

/// Exponential tilt of the log-weights `theta` by `mu * c`, normalized.
fn tilt(theta: &[f64], c: &[f64], mu: f64, out: &mut [f64]) {
    for ((o, t), ci) in out.iter_mut().zip(theta).zip(c) {
        *o = t + mu * ci;
    }
    let z = log_sum_exp(out);
    for o in out.iter_mut() {
        *o -= z;
    }
}

fn mean_var(theta: &[f64], c: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut sq = 0.0;
    for (t, ci) in theta.iter().zip(c) {
        let p = t.exp();
        mean += p * ci;
        sq += p * ci * ci;
    }
    (mean, (sq - mean * mean).max(0.0))
}

/// KL projection of normalized log-weights onto `lo <= c.lambda <= hi`.
/// Returns false when the band cannot be reached.
fn project_band(theta: &mut [f64], c: &[f64], lo: f64, hi: f64) -> bool {
    let (mean, _) = mean_var(theta, c);
    let target = if mean < lo {
        lo
    } else if mean > hi {
        hi
    } else {
        return true;
    };
    tilt_to(theta, c, target)
}

/// Tilts normalized log-weights so that `c.lambda = target`.
fn tilt_to(theta: &mut [f64], c: &[f64], target: f64) -> bool {
    let (mean, _) = mean_var(theta, c);
    if mean == target {
        return true;
    }
    let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if target <= cmin || target >= cmax {
        return false;
    }
    let base = theta.to_vec();
    let mut tilted = vec![0.0; theta.len()];
    let f = |mu: f64, buf: &mut [f64]| {
        tilt(&base, c, mu, buf);
        mean_var(buf, c)
    };
    // bracket the root of mean(mu) - target, mean is increasing in mu
    let (mut a, mut b) = if mean < target { (0.0, 1.0) } else { (-1.0, 0.0) };
    let spread = (cmax - cmin).max(f64::MIN_POSITIVE);
    let mut step = 1.0 / spread;
    loop {
        let probe = if mean < target { b } else { a };
        let (m, _) = f(probe, &mut tilted);
        if (mean < target && m >= target) || (mean > target && m <= target) {
            break;
        }
        if mean < target {
            a = b;
            b += step;
        } else {
            b = a;
            a -= step;
        }
        step *= 2.0;
        if step > 1e300 {
            return false;
        }
    }
    let mut mu = 0.5 * (a + b);
    for _ in 0..200 {
        let (m, var) = f(mu, &mut tilted);
        let err = m - target;
        if err.abs() <= 1e-15 * target.abs().max(1e-300) {
            break;
        }
        if err < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        let newton = if var > 0.0 { mu - err / var } else { f64::NAN };
        mu = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if b - a <= 1e-15 * mu.abs().max(1.0) {
            break;
        }
    }
    tilt(&base, c, mu, &mut tilted);
    theta.copy_from_slice(&tilted);
    true
}

/// Frank-Wolfe gap `max_{feasible l} <g, l - lambda>` over the simplex with
/// an optional band, via the one-dimensional Lagrangian dual.
fn duality_gap(g: &[f64], lambda: &[f64], band: Option<(&[f64], f64, f64)>) -> f64 {
    let current: f64 = g.iter().zip(lambda).map(|(a, b)| a * b).sum();
    let Some((c, lo, hi)) = band else {
        return g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - current;
    };
    let dual = |nu: f64| {
        let mx = g.iter().zip(c).map(|(gi, ci)| gi + nu * ci).fold(f64::NEG_INFINITY, f64::max);
        mx - nu * if nu > 0.0 { lo } else { hi }
    };
    // dual is convex piecewise linear in nu; golden-section on a wide bracket
    let gspread = g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - g.iter().copied().fold(f64::INFINITY, f64::min);
    let cspread = c.iter().copied().fold(f64::NEG_INFINITY, f64::max) - c.iter().copied().fold(f64::INFINITY, f64::min);
    let mut bound = if cspread > 0.0 { 4.0 * (gspread + 1e-300) / cspread * 1e3 } else { 0.0 };
    let mut best = dual(0.0);
    for _ in 0..3 {
        let (mut a, mut b) = (-bound, bound);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (dual(x1), dual(x2));
        for _ in 0..200 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = dual(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = dual(x2);
            }
        }
        best = best.min(f1).min(f2);
        bound *= 1e3;
    }
    (best - current).max(0.0)
}

fn band_ref(bc: &Option<(Vec<f64>, f64, f64)>) -> Option<(&[f64], f64, f64)> {
    bc.as_ref().map(|(c, lo, hi)| (c.as_slice(), *lo, *hi))
}

/// Maximizes a concave objective from a feasible start `w0`.
pub fn simplex_maximize<O: ConcaveObjective>(prog: &SimplexProgram<O>, w0: &[f64]) -> Result<SimplexSolution> {
    let m = w0.len();
    let opts = prog.options;
    if m == 0 {
        return Err(Error::InfeasibleStart("empty weight vector".into()));
    }
    if let Some(band) = &prog.constraints.band {
        if band.coeffs.len() != m {
            return Err(Error::invalid("band coefficients do not match the weight dimension"));
        }
    }
    let violation = prog.infeasibility(w0);
    if violation > opts.feas_tol {
        return Err(Error::InfeasibleStart(format!("constraint violation {violation:.3e}")));
    }
    let param = Param { monotone: prog.constraints.monotone, m };
    let start = if param.monotone { isotonic_nondecreasing(w0, None) } else { w0.to_vec() };
    let band_c: Option<(Vec<f64>, f64, f64)> = prog.constraints.band.as_ref().map(|b| {
        let mut c = vec![0.0; m];
        param.pull_back(&b.coeffs, &mut c);
        (c, b.lo, b.hi)
    });

    let lambda0 = param.from_weights(&start);
    if prog.objective.curvature(&start).is_some() {
        return barrier_maximize(prog, &param, &lambda0, band_ref(&band_c));
    }

    // log mixture weights; zero coordinates are lifted so they can move
    let total: f64 = lambda0.iter().sum();
    let floor = 1e-12 / m as f64;
    let mut theta: Vec<f64> = lambda0.iter().map(|l| (l / total).max(floor).ln()).collect();
    let z = log_sum_exp(&theta);
    theta.iter_mut().for_each(|t| *t -= z);
    if let Some((c, lo, hi)) = &band_c {
        if !project_band(&mut theta, c, *lo, *hi) {
            return Err(Error::InfeasibleStart("band is not reachable".into()));
        }
    }

    let mut lambda: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    let mut w = vec![0.0; m];
    let mut gw = vec![0.0; m];
    let mut g = vec![0.0; m];
    param.to_weights(&lambda, &mut w);
    let mut f = prog.objective.value_and_gradient(&w, &mut gw);
    if !f.is_finite() {
        return Err(Error::InfeasibleStart("objective is not finite at the start".into()));
    }
    param.pull_back(&gw, &mut g);

    let mut eta = 1.0 / g.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    let mut cand_theta = vec![0.0; m];
    let mut cand_lambda = vec![0.0; m];
    let mut cand_w = vec![0.0; m];
    let mut cand_gw = vec![0.0; m];
    let mut sweep_start = f;
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    while iterations < opts.max_iter {
        if iterations % 10 == 0 {
            gap = duality_gap(&g, &lambda, band_ref(&band_c));
            if gap <= opts.rel_tol * f.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        iterations += 1;
        let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        for _ in 0..60 {
            for s in 0..m {
                cand_theta[s] = theta[s] + eta * (g[s] - gmax);
            }
            let z = log_sum_exp(&cand_theta);
            cand_theta.iter_mut().for_each(|t| *t -= z);
            if let Some((c, lo, hi)) = &band_c {
                project_band(&mut cand_theta, c, *lo, *hi);
            }
            for s in 0..m {
                cand_lambda[s] = cand_theta[s].exp();
            }
            param.to_weights(&cand_lambda, &mut cand_w);
            let fc = prog.objective.value_and_gradient(&cand_w, &mut cand_gw);
            if fc.is_finite() && fc >= f {
                std::mem::swap(&mut theta, &mut cand_theta);
                std::mem::swap(&mut lambda, &mut cand_lambda);
                std::mem::swap(&mut w, &mut cand_w);
                std::mem::swap(&mut gw, &mut cand_gw);
                f = fc;
                param.pull_back(&gw, &mut g);
                eta *= 1.5;
                accepted = true;
                break;
            }
            eta *= 0.3;
        }
        if !accepted {
            // no ascent direction at machine precision
            gap = duality_gap(&g, &lambda, band_ref(&band_c));
            converged = true;
            break;
        }
        if iterations % opts.sweep == 0 {
            if f - sweep_start <= opts.rel_tol * f.abs().max(1.0) * 1e-3 {
                gap = duality_gap(&g, &lambda, band_ref(&band_c));
                converged = true;
                break;
            }
            sweep_start = f;
        }
    }
    if !converged {
        gap = duality_gap(&g, &lambda, band_ref(&band_c));
        converged = gap <= opts.rel_tol * f.abs().max(1.0);
    }

    let diagnostics = SolverDiagnostics {
        objective: f,
        iterations,
        kkt_residual: gap / f.abs().max(1.0),
        feasibility: prog.infeasibility(&w),
        converged,
    };
    if !converged {
        return Err(Error::MaxIterations { best: w, diagnostics: Box::new(diagnostics) });
    }
    Ok(SimplexSolution { weights: w, diagnostics })
}

/// Objective, gradient and curvature columns in mixture coordinates.
struct Model {
    f: f64,
    g: Vec<f64>,
    curv: Vec<(f64, Vec<f64>)>,
    w: Vec<f64>,
}

fn eval_model<O: ConcaveObjective>(obj: &O, param: &Param, x: &[f64]) -> Model {
    let m = x.len();
    let mut w = vec![0.0; m];
    param.to_weights(x, &mut w);
    let mut gw = vec![0.0; m];
    let f = obj.value_and_gradient(&w, &mut gw);
    let mut g = vec![0.0; m];
    param.pull_back(&gw, &mut g);
    let curv = obj
        .curvature(&w)
        .unwrap_or_default()
        .into_iter()
        .map(|(s, u)| {
            let mut pu = vec![0.0; m];
            param.pull_back(&u, &mut pu);
            (s, pu)
        })
        .collect();
    Model { f, g, curv, w }
}

/// How the moment band enters the barrier problem.
#[derive(Clone, Copy)]
enum Band<'a> {
    Free,
    /// `lo < b.x < hi` through two log barriers.
    Barrier(&'a [f64], f64, f64),
    /// `b.x = edge` held exactly.
    Edge(&'a [f64], f64),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `-t F(x) - sum log x - log(b.x - lo) - log(hi - b.x)`.
fn barrier_value(t: f64, f: f64, x: &[f64], band: Band) -> f64 {
    let mut v = -t * f - x.iter().map(|xi| xi.ln()).sum::<f64>();
    if let Band::Barrier(b, lo, hi) = band {
        let bx = dot(b, x);
        v -= (bx - lo).ln() + (hi - bx).ln();
    }
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Newton direction for the barrier problem under `sum(x) = 1` (and the band
/// edge, if held).
///
/// Works in scaled coordinates `d = x * e`, where the Hessian becomes
/// `I + U U^T` with a few columns, inverted through a thin SVD of `U`; the
/// equality constraints are eliminated by a small Schur complement, followed
/// by two rounds of iterative refinement. Returns `d` and the squared Newton
/// decrement.
fn newton_direction(model: &Model, t: f64, x: &[f64], band: Band) -> Option<(Vec<f64>, f64)> {
    let m = x.len();
    let mut grad: Vec<f64> = (0..m).map(|j| x[j] * (-t * model.g[j]) - 1.0).collect();
    let mut cols: Vec<Vec<f64>> = model
        .curv
        .iter()
        .filter(|(s, _)| *s > 0.0)
        .map(|(s, u)| {
            let k = (t * s).sqrt();
            u.iter().zip(x).map(|(v, xj)| k * v * xj).collect()
        })
        .collect();
    let mut eqs: Vec<(Vec<f64>, f64)> = vec![(x.to_vec(), 1.0 - x.iter().sum::<f64>())];
    match band {
        Band::Free => {}
        Band::Barrier(b, lo, hi) => {
            let bx = dot(b, x);
            let (sl, sh) = (bx - lo, hi - bx);
            for j in 0..m {
                grad[j] += x[j] * b[j] * (1.0 / sh - 1.0 / sl);
            }
            let k = (1.0 / (sl * sl) + 1.0 / (sh * sh)).sqrt();
            cols.push(b.iter().zip(x).map(|(v, xj)| k * v * xj).collect());
        }
        Band::Edge(b, edge) => {
            eqs.push((b.iter().zip(x).map(|(v, xj)| v * xj).collect(), edge - dot(b, x)));
        }
    }
    let r = cols.len();
    let ut = DMatrix::from_fn(m, r, |j, a| cols[a][j]);
    let svd = ut.svd(true, false);
    let basis = svd.u?;
    let sig2: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    // I + U U^T = I + Q diag(s^2) Q^T
    let spectral = |v: &[f64], f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut out = v.to_vec();
        for (a, s2) in sig2.iter().enumerate() {
            let col = basis.column(a);
            let c: f64 = col.iter().zip(v).map(|(p, q)| p * q).sum::<f64>() * f(*s2);
            for j in 0..m {
                out[j] += c * col[j];
            }
        }
        out
    };
    let hinv = |v: &[f64]| spectral(v, &|s2| -s2 / (1.0 + s2));
    let apply_h = |v: &[f64]| spectral(v, &|s2| s2);
    let project = |v: &[f64]| -> Vec<f64> { cols.iter().map(|col| dot(col, v)).collect() };

    let ne = eqs.len();
    let pa: Vec<Vec<f64>> = eqs.iter().map(|(a, _)| hinv(a)).collect();
    let schur = DMatrix::from_fn(ne, ne, |i, k| dot(&eqs[i].0, &pa[k]));
    let schur = schur.lu();
    // solves H e + A nu = rhs, A^T e = c
    let kkt = |rhs: &[f64], c: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
        let p = hinv(rhs);
        let z = DVector::from_fn(ne, |i, _| dot(&eqs[i].0, &p) - c[i]);
        let nu = schur.solve(&z)?;
        let mut e = p;
        for (k, col) in pa.iter().enumerate() {
            for j in 0..m {
                e[j] -= nu[k] * col[j];
            }
        }
        Some((e, nu.as_slice().to_vec()))
    };
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    let targets: Vec<f64> = eqs.iter().map(|(_, c)| *c).collect();
    let (mut e, mut nu) = kkt(&rhs, &targets)?;
    for _ in 0..2 {
        let he = apply_h(&e);
        let res: Vec<f64> = (0..m)
            .map(|j| rhs[j] - he[j] - (0..ne).map(|k| nu[k] * eqs[k].0[j]).sum::<f64>())
            .collect();
        let cres: Vec<f64> = (0..ne).map(|k| targets[k] - dot(&eqs[k].0, &e)).collect();
        let (de, dnu) = kkt(&res, &cres)?;
        for j in 0..m {
            e[j] += de[j];
        }
        for k in 0..ne {
            nu[k] += dnu[k];
        }
    }
    let ue = project(&e);
    let dec2 = dot(&e, &e) + dot(&ue, &ue);
    let d = e.iter().zip(x).map(|(a, b)| a * b).collect();
    Some((d, dec2))
}

/// Switches a band barrier to an equality once `x` is within a thousandth of
/// the width from one side, moving `x` onto that side.
fn hold_edge(x: &mut Vec<f64>, band: &mut Band) -> bool {
    let Band::Barrier(b, lo, hi) = *band else {
        return false;
    };
    let bx = dot(b, x);
    let width = hi - lo;
    let edge = if hi - bx < 1e-3 * width {
        hi
    } else if bx - lo < 1e-3 * width {
        lo
    } else {
        return false;
    };
    let mut theta: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    if !tilt_to(&mut theta, b, edge) {
        return false;
    }
    *x = theta.iter().map(|v| v.exp()).collect();
    *band = Band::Edge(b, edge);
    true
}

/// Log-barrier path following in mixture coordinates. The duality gap of a
/// centred point at barrier weight `t` is at most `n_ineq / t`. Once a
/// centred point sits against one side of the band, that side is held as an
/// equality for the remaining stages.
fn barrier_maximize<O: ConcaveObjective>(
    prog: &SimplexProgram<O>,
    param: &Param,
    lambda0: &[f64],
    band_spec: Option<(&[f64], f64, f64)>,
) -> Result<SimplexSolution> {
    let m = lambda0.len();
    let opts = prog.options;
    let total: f64 = lambda0.iter().sum();
    let mut x: Vec<f64> = lambda0.iter().map(|l| 0.99 * l / total + 0.01 / m as f64).collect();
    let mut band = Band::Free;
    if let Some((b, lo, hi)) = band_spec {
        let bx = dot(b, &x);
        let margin = 0.1 * (hi - lo);
        if !(bx > lo + margin && bx < hi - margin) {
            let mut theta: Vec<f64> = x.iter().map(|v| v.ln()).collect();
            if hi <= lo || !tilt_to(&mut theta, b, 0.5 * (lo + hi)) {
                return Err(Error::InfeasibleStart("band has no interior point".into()));
            }
            x = theta.iter().map(|v| v.exp()).collect();
        }
        band = Band::Barrier(b, lo, hi);
    }
    let mut n_ineq = (m + if band_spec.is_some() { 2 } else { 0 }) as f64;
    let mut model = eval_model(&prog.objective, param, &x);
    if !model.f.is_finite() {
        return Err(Error::InfeasibleStart("objective is not finite at the start".into()));
    }
    let mut t = n_ineq / model.f.abs().max(1.0);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut phi = barrier_value(t, model.f, &x, band);
        for _ in 0..100 {
            let Some((d, dec2)) = newton_direction(&model, t, &x, band) else {
                break;
            };
            if !(dec2 > 1e-10) {
                break;
            }
            iterations += 1;
            let mut smax = f64::INFINITY;
            for j in 0..m {
                if d[j] < 0.0 {
                    smax = smax.min(-x[j] / d[j]);
                }
            }
            if let Band::Barrier(b, lo, hi) = band {
                let bx = dot(b, &x);
                let bd = dot(b, &d);
                if bd < 0.0 {
                    smax = smax.min((bx - lo) / -bd);
                } else if bd > 0.0 {
                    smax = smax.min((hi - bx) / bd);
                }
            }
            let mut s = (0.99 * smax).min(1.0);
            let mut accepted = false;
            for _ in 0..60 {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                if xn.iter().all(|&v| v > 0.0) {
                    let mn = eval_model(&prog.objective, param, &xn);
                    let phin = barrier_value(t, mn.f, &xn, band);
                    if phin.is_finite() && phin <= phi - 0.01 * s * dec2 + 1e-14 * phi.abs() {
                        x = xn;
                        model = mn;
                        phi = phin;
                        accepted = true;
                        if hold_edge(&mut x, &mut band) {
                            n_ineq = m as f64;
                            model = eval_model(&prog.objective, param, &x);
                            phi = barrier_value(t, model.f, &x, band);
                        }
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted || iterations >= opts.max_iter {
                break;
            }
        }
        if n_ineq / t <= opts.rel_tol * model.f.abs().max(1.0) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        t *= 10.0;
    }
    let gap = n_ineq / t;
    let diagnostics = SolverDiagnostics {
        objective: model.f,
        iterations,
        kkt_residual: gap / model.f.abs().max(1.0),
        feasibility: prog.infeasibility(&model.w),
        converged,
    };
    if !converged {
        return Err(Error::MaxIterations { best: model.w, diagnostics: Box::new(diagnostics) });
    }
    Ok(SimplexSolution { weights: model.w, diagnostics })
}
