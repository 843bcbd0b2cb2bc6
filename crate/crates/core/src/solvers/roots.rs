use crate::error::{Error, Result};

/// Bisection for a monotone `f` with a sign change on `[lo, hi]`. Stops when
/// the bracket is narrower than `tol` or `f` hits zero exactly.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { f_lo: fa, f_hi: fb });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn linear_root() {
        let r = bisect(|x| x - 2.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_median() {
        let r = bisect(|x| normal_cdf(x) - 0.5, -3.0, 4.0, 1e-12).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| 1.0 - x, -4.0, 4.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }
}
