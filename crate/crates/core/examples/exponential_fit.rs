//! Fit a nonnegative mixture of exponential decays to an accuracy curve and
//! extrapolate it.

use acx::accuracy::{MomentCurve, MomentPoint};
use acx::estimators::{exp_extrapolate, fit_decay_mixture, KappaGrid};

fn main() -> acx::Result<()> {
    let rates = KappaGrid::default().rates();
    let (a, b) = (rates[40], rates[160]);
    let curve = |t: f64| 0.6 * (-a * t).exp() + 0.4 * (-b * t).exp();

    let k = 10;
    let points = (2..=k).map(|t| MomentPoint { t, p: curve(t as f64) }).collect();
    let observed = MomentCurve::new(points, k)?;
    let fit = fit_decay_mixture(&observed, &rates)?;

    println!("residual norm {:.2e}", fit.residual_norm);
    for atom in fit.mixture.atoms().iter().filter(|a| a.weight > 1e-8) {
        println!("  rate {:.5} weight {:.5}", atom.rate, atom.weight);
    }
    // far-apart rates are identifiable from t <= 10; nearby ones are not
    for t in [10, 20, 50, 100] {
        println!("t = {t:>3}: fitted {:.6}, true {:.6}", exp_extrapolate(&fit.mixture, &observed, t), curve(t as f64));
    }
    Ok(())
}
