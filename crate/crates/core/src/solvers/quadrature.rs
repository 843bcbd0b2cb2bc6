#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    /// The interval is first cut into this many equal panels so that narrow
    /// peaks cannot hide between the nodes of one wide rule.
    pub initial_panels: usize,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, initial_panels: 64, max_subdivisions: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Panel { a, b, value: kron * h, error: ((kron - gauss) * h).abs() }
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with(f, a, b, &QuadConfig { abs_tol: tol, ..QuadConfig::default() }).map(|r| r.value)
}

pub fn integrate_with(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let n = cfg.initial_panels.max(1);
    let width = (b - a) / n as f64;
    let mut panels: Vec<Panel> = (0..n)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n { b } else { a + width * (i + 1) as f64 };
            kronrod(&f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * n;
    let totals = |panels: &[Panel]| {
        panels.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    for _ in 0..cfg.max_subdivisions {
        let (value, error) = totals(&panels);
        if !value.is_finite() {
            break;
        }
        if error <= cfg.abs_tol {
            return Ok(QuadResult { value, error_bound: error, evaluations });
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.error > panels[best].error { i } else { best });
        let Panel { a: lo, b: hi, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        panels.push(kronrod(&f, lo, mid));
        panels.push(kronrod(&f, mid, hi));
        evaluations += 30;
    }
    let (value, error) = totals(&panels);
    if error <= cfg.abs_tol {
        Ok(QuadResult { value, error_bound: error, evaluations })
    } else {
        Err(Error::ToleranceNotMet { estimate: value, error_bound: error })
    }
}
