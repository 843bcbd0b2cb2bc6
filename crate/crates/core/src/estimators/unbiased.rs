use crate::accuracy::{MomentCurve, MomentPoint, WinCounts};
use crate::error::{Error, Result};

/// Which binomial coefficient divides the U-statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialConvention {
    /// `C(k - 1, t - 1)`: `V` is a sum of `k - 1` comparisons.
    #[default]
    KMinusOne,
    /// `C(k, t - 1)`, kept for comparison with the literal formula that uses
    /// `k` trials. Biased under the `k - 1` trial model.
    K,
}

/// `C(v, n) / C(total, n)` as a product of ratios. Extends to non-integer
/// `v` (half-tie counts) through the falling factorial.
pub(crate) fn binomial_ratio(v: f64, n: usize, total: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..n {
        let num = v - j as f64;
        if num == 0.0 {
            return 0.0;
        }
        r *= num / (total - j) as f64;
    }
    r
}

/// Minimum-variance unbiased estimates `p_t = E[U^(t-1)]` for `t = 2..=t_max`.
pub fn unbiased_moments(w: &WinCounts, t_max: usize) -> Result<MomentCurve> {
    unbiased_moments_with(w, t_max, TrialConvention::KMinusOne)
}

pub fn unbiased_moments_with(w: &WinCounts, t_max: usize, convention: TrialConvention) -> Result<MomentCurve> {
    let k = w.k();
    if t_max > k {
        return Err(Error::Range(format!(
            "unbiased estimate exists only for t <= k = {k}, requested t_max = {t_max}"
        )));
    }
    if t_max < 2 {
        return Err(Error::Range(format!("t_max must be at least 2, got {t_max}")));
    }
    let total = match convention {
        TrialConvention::KMinusOne => k - 1,
        TrialConvention::K => k,
    };
    let hist = w.histogram();
    let n = w.total() as f64;
    let entries = (2..=t_max)
        .map(|t| {
            let sum: f64 = hist
                .iter()
                .map(|&(v, count)| count as f64 * binomial_ratio(v, t - 1, total))
                .sum();
            MomentPoint { t, p: sum / n }
        })
        .collect();
    MomentCurve::from_raw(entries, k)
}
