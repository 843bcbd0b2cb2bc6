//! Extrapolation under a Gaussian margin model: the true-class margin over
//! each competitor is `c + Z - Z_j` style, giving accuracy
//! `pi_t(c) = int phi(z - c) Phi(z)^(t-1) dz`.

use crate::error::{Error, Result};
use crate::solvers::{bisect, integrate_with, QuadConfig};
use crate::special::{log_normal_cdf, normal_pdf};

const C_MIN: f64 = -40.0;
const C_MAX: f64 = 40.0;
const P_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct HdConfig {
    pub initial_panels: usize,
    pub abs_tol: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub inverse_tol: f64,
}

impl Default for HdConfig {
    fn default() -> Self {
        Self { initial_panels: 64, abs_tol: 1e-13, inverse_tol: 1e-12 }
    }
}

/// `pi_t(c)` with the default configuration.
pub fn pi_bar(t: usize, c: f64) -> Result<f64> {
    pi_bar_with(t, c, &HdConfig::default())
}

pub fn pi_bar_with(t: usize, c: f64, cfg: &HdConfig) -> Result<f64> {
    if t == 0 {
        return Err(Error::Domain("pi_bar needs t >= 1".into()));
    }
    if !c.is_finite() {
        return Err(Error::Domain(format!("pi_bar needs finite c, got {c}")));
    }
    if t == 1 {
        return Ok(1.0);
    }
    let e = (t - 1) as f64;
    let lo = C_MIN.min(c - 10.0);
    let hi = C_MAX.max(c + 10.0);
    let quad = QuadConfig { abs_tol: cfg.abs_tol, initial_panels: cfg.initial_panels.max(32), ..QuadConfig::default() };
    let r = integrate_with(|z| normal_pdf(z - c) * (e * log_normal_cdf(z)).exp(), lo, hi, &quad)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Solves `pi_t(c) = p` for `c` in `[-40, 40]`.
pub fn pi_bar_inverse(t: usize, p: f64) -> Result<f64> {
    pi_bar_inverse_with(t, p, &HdConfig::default())
}

pub fn pi_bar_inverse_with(t: usize, p: f64, cfg: &HdConfig) -> Result<f64> {
    if t < 2 {
        return Err(Error::Domain("pi_bar is constant at t = 1 and cannot be inverted".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("pi_bar inverse needs 0 < p < 1, got {p}")));
    }
    let f = |c: f64| pi_bar_with(t, c, cfg).map(|v| v - p).unwrap_or(f64::NAN);
    let (f_lo, f_hi) = (f(C_MIN), f(C_MAX));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Domain(format!(
            "p = {p} has no preimage for t = {t} on [{C_MIN}, {C_MAX}] (endpoint residuals {f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    bisect(f, C_MIN, C_MAX, cfg.inverse_tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HdExtrapolation {
    pub c: f64,
    pub p_hat: f64,
    pub warnings: Vec<String>,
}

/// Maps an accuracy `p_k` observed at `k` classes to the predicted accuracy
/// at `target` classes.
pub fn hd_extrapolate(p_k: f64, k: usize, target: usize) -> Result<HdExtrapolation> {
    hd_extrapolate_with(p_k, k, target, &HdConfig::default())
}

pub fn hd_extrapolate_with(p_k: f64, k: usize, target: usize, cfg: &HdConfig) -> Result<HdExtrapolation> {
    if !p_k.is_finite() {
        return Err(Error::Domain(format!("p_k must be finite, got {p_k}")));
    }
    let mut warnings = Vec::new();
    let clamped = p_k.clamp(P_FLOOR, 1.0 - P_FLOOR);
    if clamped != p_k {
        warnings.push(format!("p_k = {p_k} clamped to {clamped} before inversion"));
    }
    let c = pi_bar_inverse_with(k, clamped, cfg)?;
    if target == k {
        return Ok(HdExtrapolation { c, p_hat: p_k.clamp(0.0, 1.0), warnings });
    }
    let p_hat = pi_bar_with(target, c, cfg)?;
    Ok(HdExtrapolation { c, p_hat, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn two_classes_closed_form() {
        for &c in &[-3.0, -0.5, 0.0, 0.7, 2.0, 5.0] {
            let got = pi_bar(2, c).unwrap();
            let want = normal_cdf(c / std::f64::consts::SQRT_2);
            assert!((got - want).abs() < 1e-12, "c={c}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_margin_is_chance() {
        for t in [1usize, 2, 3, 7, 20, 100] {
            assert!((pi_bar(t, 0.0).unwrap() - 1.0 / t as f64).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn inverse_round_trips() {
        for &c in &[-2.0, 0.0, 1.0, 3.5] {
            for t in [2usize, 10, 50] {
                let p = pi_bar(t, c).unwrap();
                let back = pi_bar_inverse(t, p).unwrap();
                assert!((back - c).abs() < 1e-6, "t={t}, c={c}: {back}");
            }
        }
        let c = pi_bar_inverse(2, 0.75).unwrap();
        assert!((pi_bar(2, c).unwrap() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_both_arguments() {
        let cs = [-1.0, 0.0, 0.5, 1.0, 2.0, 4.0];
        let ts = [2usize, 3, 5, 10, 40, 200];
        for &t in &ts {
            let row: Vec<f64> = cs.iter().map(|&c| pi_bar(t, c).unwrap()).collect();
            assert!(row.windows(2).all(|w| w[1] > w[0]));
        }
        for &c in &cs {
            let col: Vec<f64> = ts.iter().map(|&t| pi_bar(t, c).unwrap()).collect();
            assert!(col.windows(2).all(|w| w[1] < w[0]));
        }
    }

    /// Independent oracle: composite Simpson on a fixed fine grid with a
    /// direct `Phi` power, and a plain bisection.
    fn simpson_pi(t: usize, c: f64) -> f64 {
        let (a, b, n) = (c - 12.0, c + 12.0, 24_000usize);
        let h = (b - a) / n as f64;
        let f = |z: f64| normal_pdf(z - c) * normal_cdf(z).powi(t as i32 - 1);
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn matches_independent_quadrature() {
        let (k, big, p) = (20usize, 400usize, 0.9);
        let (mut lo, mut hi) = (-10.0, 15.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if simpson_pi(k, mid) < p {
                lo = mid
            } else {
                hi = mid
            }
        }
        let oracle = simpson_pi(big, 0.5 * (lo + hi));
        let got = hd_extrapolate(p, k, big).unwrap();
        assert!((got.p_hat - oracle).abs() < 1e-8, "{} vs {oracle}", got.p_hat);
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn identity_and_chance_level() {
        assert_eq!(hd_extrapolate(0.7, 12, 12).unwrap().p_hat, 0.7);
        let r = hd_extrapolate(1.0 / 20.0, 20, 400).unwrap();
        assert!(r.c.abs() < 1e-8);
        assert!((r.p_hat - 1.0 / 400.0).abs() < 1e-9);
    }

    #[test]
    fn increasing_in_observed_accuracy() {
        let ps = [0.1, 0.3, 0.5, 0.7, 0.9, 0.99];
        let out: Vec<f64> = ps.iter().map(|&p| hd_extrapolate(p, 10, 200).unwrap().p_hat).collect();
        assert!(out.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn extreme_inputs() {
        let r = hd_extrapolate(1.0, 10, 100).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.p_hat > 0.99);
        assert!(matches!(pi_bar_inverse(5, 1.5), Err(Error::Domain(_))));
        assert!(matches!(pi_bar(0, 0.0), Err(Error::Domain(_))));
        assert_eq!(pi_bar(1, 3.0).unwrap(), 1.0);
    }
}
