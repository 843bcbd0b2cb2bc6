//! Constrained maximum pseudolikelihood for the conditional-accuracy density.
//!
//! Each win count contributes `log sum_r w_r u_r^v (1 - u_r)^(n - v)` with
//! `n = k - 1`. The density is restricted to nondecreasing cell masses and its
//! `(k - 1)`-th moment is pinned to a band around an anchor value.

use super::unbiased::unbiased_moments;
use crate::accuracy::{grid, DiscreteDensity, WinCounts};
use crate::error::{Error, Result};
use crate::solvers::{
    simplex_maximize, ConcaveObjective, LinearBand, SimplexConstraints, SimplexOptions, SimplexProgram,
    SolverDiagnostics,
};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ConsConfig {
    pub grid_size: usize,
    pub anchor_tol: f64,
    pub max_iter: usize,
    /// Relative tolerance on the objective (and on the duality gap).
    pub rel_tol: f64,
    /// Gap above which a capped run counts as a failure.
    pub kkt_tol: f64,
    /// Target for the `(k - 1)`-th moment; `None` uses the unbiased `p_k`.
    pub anchor: Option<f64>,
}

impl Default for ConsConfig {
    fn default() -> Self {
        Self { grid_size: 512, anchor_tol: 1e-6, max_iter: 50_000, rel_tol: 1e-9, kkt_tol: 1e-6, anchor: None }
    }
}

impl ConsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 16 {
            return Err(Error::invalid(format!("grid size {} below the minimum of 16", self.grid_size)));
        }
        if !(self.anchor_tol > 0.0) {
            return Err(Error::invalid("anchor tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsFit {
    pub density: DiscreteDensity,
    /// Log pseudolikelihood without the binomial coefficients.
    pub objective: f64,
    /// Centre of the moment band actually enforced.
    pub anchor: f64,
    pub diagnostics: SolverDiagnostics,
    pub warnings: Vec<String>,
}

/// The pseudolikelihood as a concave function of the cell masses.
///
/// Rows are grouped by distinct win count and scaled by their maximum over
/// the grid so that large `k` does not underflow.
pub struct PseudoLikelihood {
    counts: Vec<f64>,
    /// Per distinct count: likelihood row over the grid, divided by its max.
    rows: Vec<Vec<f64>>,
    log_scale: Vec<f64>,
}

impl PseudoLikelihood {
    pub fn new(w: &WinCounts, grid_size: usize) -> Self {
        let n = w.trials() as f64;
        let us: Vec<f64> = grid(grid_size).collect();
        let mut counts = Vec::new();
        let mut rows = Vec::new();
        let mut log_scale = Vec::new();
        for (v, c) in w.histogram() {
            let logs: Vec<f64> = us.iter().map(|&u| v * u.ln() + (n - v) * (-u).ln_1p()).collect();
            let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rows.push(logs.iter().map(|l| (l - mx).exp()).collect());
            log_scale.push(mx);
            counts.push(c as f64);
        }
        Self { counts, rows, log_scale }
    }

    pub fn n_obs(&self) -> f64 {
        self.counts.iter().sum()
    }
}

impl ConcaveObjective for PseudoLikelihood {
    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for ((row, &c), &shift) in self.rows.iter().zip(&self.counts).zip(&self.log_scale) {
            let mix: f64 = row.iter().zip(w).map(|(l, x)| l * x).sum();
            total += c * (mix.ln() + shift);
            let scale = c / mix;
            for (g, l) in grad.iter_mut().zip(row) {
                *g += scale * l;
            }
        }
        total
    }

    fn curvature(&self, w: &[f64]) -> Option<Vec<(f64, Vec<f64>)>> {
        Some(
            self.rows
                .iter()
                .zip(&self.counts)
                .map(|(row, &c)| {
                    let mix: f64 = row.iter().zip(w).map(|(l, x)| l * x).sum();
                    (c / (mix * mix), row.clone())
                })
                .collect(),
        )
    }
}

/// Moment coefficients `u_r^(k-1)` for the anchor band.
fn anchor_coeffs(k: usize, grid_size: usize) -> Vec<f64> {
    grid(grid_size).map(|u| u.powi(k as i32 - 1)).collect()
}

/// Maximizes the pseudolikelihood over nondecreasing densities whose
/// `(k - 1)`-th moment is within `anchor_tol` of the anchor.
pub fn constrained_pmle(w: &WinCounts, cfg: &ConsConfig) -> Result<ConsFit> {
    cfg.validate()?;
    let k = w.k();
    let m = cfg.grid_size;
    let mut warnings = Vec::new();
    let mut anchor = match cfg.anchor {
        Some(a) => a,
        None => unbiased_moments(w, k)?.get(k).expect("p_k present"),
    };
    let coeffs = anchor_coeffs(k, m);
    let max_moment = coeffs[m - 1];
    let min_moment = coeffs.iter().sum::<f64>() / m as f64;
    let (mut lo, mut hi) = (anchor - cfg.anchor_tol, anchor + cfg.anchor_tol);
    if lo > max_moment {
        return Err(Error::ConvergenceFailure {
            reason: format!(
                "anchor moment {anchor:.6} exceeds the largest value {max_moment:.6} reachable on a {m}-cell grid"
            ),
            closest_feasible_anchor: Some(max_moment),
            diagnostics: None,
        });
    }
    if hi < min_moment {
        warnings.push(format!(
            "anchor {anchor:.6} below the smallest moment {min_moment:.6} of a nondecreasing density; relaxed to it"
        ));
        lo = min_moment;
        hi = min_moment + 2.0 * cfg.anchor_tol;
        anchor = min_moment + cfg.anchor_tol;
    }
    if hi > max_moment {
        hi = max_moment;
    }
    let constraints = SimplexConstraints {
        monotone: true,
        band: Some(LinearBand { coeffs, lo, hi }),
    };
    let start = constraints.feasible_point(&vec![1.0; m]).ok_or_else(|| Error::ConvergenceFailure {
        reason: "no feasible starting density for the anchor band".into(),
        closest_feasible_anchor: Some(anchor.clamp(min_moment, max_moment)),
        diagnostics: None,
    })?;
    let objective = PseudoLikelihood::new(w, m);
    let prog = SimplexProgram::new(objective, constraints).with_options(SimplexOptions {
        rel_tol: cfg.rel_tol,
        max_iter: cfg.max_iter,
        ..SimplexOptions::default()
    });
    solve(&prog, &start, cfg, anchor, warnings)
}

fn solve(
    prog: &SimplexProgram<PseudoLikelihood>,
    start: &[f64],
    cfg: &ConsConfig,
    anchor: f64,
    mut warnings: Vec<String>,
) -> Result<ConsFit> {
    let (weights, diagnostics) = match simplex_maximize(prog, start) {
        Ok(sol) => (sol.weights, sol.diagnostics),
        Err(Error::MaxIterations { best, diagnostics }) => {
            if diagnostics.kkt_residual > cfg.kkt_tol {
                return Err(Error::ConvergenceFailure {
                    reason: format!(
                        "iteration cap {} reached with relative duality gap {:.3e}",
                        cfg.max_iter, diagnostics.kkt_residual
                    ),
                    closest_feasible_anchor: None,
                    diagnostics: Some(diagnostics),
                });
            }
            warnings.push(format!(
                "iteration cap reached; relative duality gap {:.3e} within tolerance",
                diagnostics.kkt_residual
            ));
            (best, *diagnostics)
        }
        Err(e) => return Err(e),
    };
    let sum: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|x| x / sum).collect();
    let density = if prog.constraints.monotone {
        DiscreteDensity::new_monotone(weights)?
    } else {
        DiscreteDensity::new(weights)?
    };
    Ok(ConsFit { density, objective: diagnostics.objective, anchor, diagnostics, warnings })
}

/// Unconstrained maximum pseudolikelihood (simplex only). Not unique in
/// general; kept for comparisons against the constrained fit.
#[cfg(test)]
pub(crate) fn pmle_unconstrained(w: &WinCounts, cfg: &ConsConfig) -> Result<ConsFit> {
    cfg.validate()?;
    let m = cfg.grid_size;
    let prog = SimplexProgram::new(PseudoLikelihood::new(w, m), SimplexConstraints::default()).with_options(
        SimplexOptions { rel_tol: cfg.rel_tol, max_iter: cfg.max_iter, ..SimplexOptions::default() },
    );
    solve(&prog, &vec![1.0 / m as f64; m], cfg, f64::NAN, Vec::new())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::accuracy::density_moment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta, Binomial, Distribution};

    pub(crate) fn sample_counts(k: usize, n: usize, seed: u64, draw_u: impl Fn(&mut ChaCha8Rng) -> f64) -> WinCounts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n)
            .map(|_| {
                let u = draw_u(&mut rng);
                Binomial::new((k - 1) as u64, u).unwrap().sample(&mut rng) as u32
            })
            .collect();
        WinCounts::pooled(k, v).unwrap()
    }

    fn check_constraints(fit: &ConsFit, k: usize, tol: f64) {
        let d = &fit.density;
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(d.weights().iter().all(|&x| x >= 0.0));
        assert!(d.weights().windows(2).all(|p| p[1] >= p[0] - 1e-12));
        assert!((density_moment(d, k) - fit.anchor).abs() <= tol + 1e-9, "anchor {} vs {}", density_moment(d, k), fit.anchor);
    }

    #[test]
    fn linear_density_moments() {
        let k = 20;
        let beta = Beta::new(2.0, 1.0).unwrap();
        let w = sample_counts(k, 20_000, 5, |r| beta.sample(r));
        let fit = constrained_pmle(&w, &ConsConfig::default()).unwrap();
        check_constraints(&fit, k, 1e-6);
        for t in 1..=40 {
            let got = density_moment(&fit.density, t);
            let truth = 2.0 / (t as f64 + 1.0);
            assert!((got - truth).abs() <= 0.02, "t={t}: {got} vs {truth}");
        }
    }

    #[test]
    fn uniform_density_moments() {
        let k = 10;
        let w = sample_counts(k, 20_000, 9, |r| r.random::<f64>());
        let fit = constrained_pmle(&w, &ConsConfig::default()).unwrap();
        check_constraints(&fit, k, 1e-6);
        for t in 1..=2 * k {
            let got = density_moment(&fit.density, t);
            assert!((got - 1.0 / t as f64).abs() <= 0.03, "t={t}: {got}");
        }
    }

    #[test]
    fn all_losses() {
        // likelihood favours u near 0; without the monotone constraint the
        // mass piles onto the lowest cells
        let k = 10;
        let w = WinCounts::pooled(k, vec![0; 200]).unwrap();
        let cfg = ConsConfig { grid_size: 64, ..ConsConfig::default() };
        let free = pmle_unconstrained(&w, &cfg).unwrap();
        assert!(density_moment(&free.density, 2) < 0.05);
        // single-cell grid search agrees on where the optimum sits
        let obj = PseudoLikelihood::new(&w, 64);
        let best_cell = (0..64)
            .max_by(|&a, &b| {
                let e = |i: usize| {
                    let mut x = vec![0.0; 64];
                    x[i] = 1.0;
                    obj.value(&x)
                };
                e(a).total_cmp(&e(b))
            })
            .unwrap();
        assert_eq!(best_cell, 0);
        // with the monotone constraint the lowest reachable density is uniform
        let cons = constrained_pmle(&w, &ConsConfig { anchor: Some(0.0), ..cfg }).unwrap();
        assert!(!cons.warnings.is_empty());
        assert!((density_moment(&cons.density, 2) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn all_wins_is_infeasible() {
        let k = 20;
        let w = WinCounts::pooled(k, vec![19; 100]).unwrap();
        match constrained_pmle(&w, &ConsConfig::default()) {
            Err(Error::ConvergenceFailure { closest_feasible_anchor: Some(a), .. }) => {
                assert!((a - (1023.0f64 / 1024.0).powi(19)).abs() < 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = 12;
        let w = sample_counts(k, 500, 2, |r| r.random::<f64>().sqrt());
        let m = 32;
        let obj = PseudoLikelihood::new(&w, m);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let mut g = vec![0.0; m];
            obj.value_and_gradient(&x, &mut g);
            for r in 0..m {
                let h = 1e-6 * x[r];
                let mut up = x.clone();
                let mut dn = x.clone();
                up[r] += h;
                dn[r] -= h;
                let fd = (obj.value(&up) - obj.value(&dn)) / (2.0 * h);
                assert!((fd - g[r]).abs() <= 1e-6 * g[r].abs(), "cell {r}: {fd} vs {}", g[r]);
            }
        }
    }

    #[test]
    fn random_feasible_starts_agree() {
        let k = 8;
        let w = sample_counts(k, 300, 4, |r| r.random::<f64>().sqrt());
        let cfg = ConsConfig { grid_size: 48, ..ConsConfig::default() };
        let reference = constrained_pmle(&w, &cfg).unwrap();
        let coeffs = anchor_coeffs(k, cfg.grid_size);
        let constraints = SimplexConstraints {
            monotone: true,
            band: Some(LinearBand { coeffs, lo: reference.anchor - cfg.anchor_tol, hi: reference.anchor + cfg.anchor_tol }),
        };
        let prog = SimplexProgram::new(PseudoLikelihood::new(&w, cfg.grid_size), constraints.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let mix: Vec<f64> = (0..cfg.grid_size).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
            let start = constraints.feasible_point(&mix).unwrap();
            let sol = simplex_maximize(&prog, &start).unwrap();
            let rel = (sol.diagnostics.objective - reference.objective).abs() / reference.objective.abs();
            assert!(rel <= 1e-6, "objective {} vs {}", sol.diagnostics.objective, reference.objective);
        }
    }
}
