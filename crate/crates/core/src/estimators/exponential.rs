use nalgebra::{DMatrix, DVector};

use crate::accuracy::{DecayAtom, DecayMixture, MomentCurve};
use crate::error::{Error, Result};
use crate::solvers::{nnls_solve, NnlsProblem};

/// Decay rates for the exponential dictionary: zero plus `n` log-spaced
/// points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct KappaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for KappaGrid {
    fn default() -> Self {
        Self { lo: 1e-4, hi: 10.0, n: 200 }
    }
}

impl KappaGrid {
    pub fn rates(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        if self.n == 1 {
            out.push(self.lo);
        } else {
            let (a, b) = (self.lo.ln(), self.hi.ln());
            out.extend((0..self.n).map(|i| (a + (b - a) * i as f64 / (self.n - 1) as f64).exp()));
        }
        out
    }
}

impl std::str::FromStr for KappaGrid {
    type Err = Error;

    /// Parses `lo:hi:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::invalid(format!("kappa grid {s:?} is not lo:hi:n with 0 < lo < hi, n >= 1"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && n >= 1 && hi.is_finite()) {
            return Err(bad());
        }
        Ok(Self { lo, hi, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub mixture: DecayMixture,
    pub residual_norm: f64,
    pub warnings: Vec<String>,
}

/// Nonnegative least-squares fit of `p_t ~ sum_l w_l exp(-t kappa_l)` over the
/// curve's entries with `2 <= t <= source_k`.
pub fn fit_decay_mixture(c: &MomentCurve, kappa_grid: &[f64]) -> Result<DecayFit> {
    if kappa_grid.is_empty() {
        return Err(Error::invalid("kappa grid is empty"));
    }
    if kappa_grid.windows(2).any(|w| w[1] <= w[0]) || kappa_grid[0] < 0.0 {
        return Err(Error::invalid("kappa grid must be nonnegative and strictly increasing"));
    }
    let points: Vec<(f64, f64)> = c
        .entries()
        .iter()
        .filter(|e| e.t >= 2 && e.t <= c.source_k())
        .map(|e| (e.t as f64, e.p))
        .collect();
    if points.is_empty() {
        return Err(Error::invalid("moment curve has no entries with 2 <= t <= k"));
    }
    let mut warnings = Vec::new();
    if points.len() < 3 {
        warnings.push(format!("only {} fit point(s) for the decay mixture", points.len()));
    }
    let a = DMatrix::from_fn(points.len(), kappa_grid.len(), |r, l| (-points[r].0 * kappa_grid[l]).exp());
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let sol = nnls_solve(&NnlsProblem::new(a, b)?)?;
    let atoms = kappa_grid
        .iter()
        .zip(&sol.x)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&rate, &weight)| DecayAtom { rate, weight })
        .collect();
    Ok(DecayFit { mixture: DecayMixture::new(atoms)?, residual_norm: sol.residual_norm, warnings })
}

/// Unbiased value for `t <= k`, mixture extrapolation (clamped to `[0, 1]`)
/// beyond.
pub fn exp_extrapolate(mix: &DecayMixture, un: &MomentCurve, t: usize) -> f64 {
    if t <= un.source_k() {
        if let Some(p) = un.get(t) {
            return p;
        }
    }
    mix.eval(t as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accuracy::MomentPoint;

    fn curve(k: usize, f: impl Fn(f64) -> f64) -> MomentCurve {
        MomentCurve::new((2..=k).map(|t| MomentPoint { t, p: f(t as f64) }).collect(), k).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = KappaGrid::default().rates();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-4).abs() < 1e-18 && (g[200] - 10.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!("0.001:5:10".parse::<KappaGrid>().unwrap().rates().len(), 11);
        assert!("5:1:10".parse::<KappaGrid>().is_err());
    }

    #[test]
    fn single_exponential_is_reproduced() {
        let c = curve(10, |t| (-0.5 * t).exp());
        let grid = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0];
        let fit = fit_decay_mixture(&c, &grid).unwrap();
        for t in 2..=10 {
            assert!((fit.mixture.eval(t as f64) - (-0.5 * t as f64).exp()).abs() <= 1e-8);
        }
    }

    /// Brute-force oracle: least squares on every support of a small grid,
    /// keeping the best nonnegative one.
    #[test]
    fn matches_small_grid_enumeration() {
        let c = curve(8, |t| (-0.5 * t).exp());
        let grid = [0.0, 0.2, 0.5, 1.3];
        let fit = fit_decay_mixture(&c, &grid).unwrap();
        let rows: Vec<f64> = (2..=8).map(|t| t as f64).collect();
        let a = DMatrix::from_fn(rows.len(), grid.len(), |r, l| (-rows[r] * grid[l]).exp());
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|t| (-0.5 * t).exp()));
        let mut best = f64::INFINITY;
        for mask in 1u32..16 {
            let cols: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            let sub = a.select_columns(&cols);
            let x = sub.clone().svd(true, true).solve(&b, 1e-14).unwrap();
            if x.iter().all(|&v| v >= 0.0) {
                best = best.min((sub * x - &b).norm());
            }
        }
        assert!(best < 1e-12);
        assert!(fit.residual_norm < 1e-10);
        let w: Vec<(f64, f64)> = fit.mixture.atoms().iter().filter(|a| a.weight > 1e-8).map(|a| (a.rate, a.weight)).collect();
        assert_eq!(w.len(), 1);
        assert!((w[0].0 - 0.5).abs() < 1e-15 && (w[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_curve_uses_zero_rate() {
        let c = curve(6, |_| 1.0);
        let fit = fit_decay_mixture(&c, &KappaGrid::default().rates()).unwrap();
        let atoms = fit.mixture.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].rate, 0.0);
        assert!((atoms[0].weight - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_exponentials() {
        let f = |t: f64| 0.6 * (-0.2 * t).exp() + 0.4 * (-2.0 * t).exp();
        let c = curve(10, f);
        let grid = [0.0, 0.05, 0.2, 0.7, 2.0, 5.0];
        let fit = fit_decay_mixture(&c, &grid).unwrap();
        for t in 2..=10 {
            assert!((fit.mixture.eval(t as f64) - f(t as f64)).abs() <= 1e-6);
        }
    }

    #[test]
    fn extrapolation_branches() {
        let c = curve(5, |t| 0.9f64.powf(t - 1.0));
        let mix = DecayMixture::new(vec![DecayAtom { rate: 0.5, weight: 1.0 }]).unwrap();
        assert_eq!(exp_extrapolate(&mix, &c, 4), 0.9f64.powi(3));
        assert_eq!(exp_extrapolate(&mix, &c, 20), (-10.0f64).exp());
        let two = DecayMixture::new(vec![
            DecayAtom { rate: 0.2, weight: 0.6 },
            DecayAtom { rate: 2.0, weight: 0.4 },
        ])
        .unwrap();
        let t = 20usize;
        let direct = 0.6 * (-0.2 * t as f64).exp() + 0.4 * (-2.0 * t as f64).exp();
        assert!((exp_extrapolate(&two, &c, t) - direct).abs() < 1e-12);
    }

    #[test]
    fn warns_on_few_points() {
        let c = curve(3, |t| 0.9f64.powf(t - 1.0));
        let fit = fit_decay_mixture(&c, &KappaGrid::default().rates()).unwrap();
        assert_eq!(fit.warnings.len(), 1);
    }
}
