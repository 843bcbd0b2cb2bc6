//! Normal-distribution helpers with a log-domain CDF that stays finite far
//! into the lower tail.

use libm::erfc;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `log Phi(z)`, accurate for all finite `z`.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z > -30.0 {
        if z > 5.0 {
            // Phi close to 1: log1p of the upper tail
            (-0.5 * erfc(z / std::f64::consts::SQRT_2)).ln_1p()
        } else {
            normal_cdf(z).ln()
        }
    } else {
        // Mills-ratio asymptotic series; relative error below 1e-12 here.
        let z2 = z * z;
        let inv = 1.0 / z2;
        let series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
        -0.5 * z2 - LN_SQRT_2PI - (-z).ln() + series.ln()
    }
}
