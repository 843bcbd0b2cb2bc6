//! Constrained maximum pseudolikelihood: estimate a nondecreasing density of
//! U from win counts, pinned to the observed k-class accuracy, and read off
//! accuracies far beyond k.

use acx::accuracy::{density_moment, WinCounts};
use acx::estimators::{constrained_pmle, ConsConfig};
use acx::simlab::rng_stream;
use rand_distr::{Beta, Binomial, Distribution};

fn main() -> acx::Result<()> {
    let k = 20;
    let mut rng = rng_stream(11, 0);
    // U ~ Beta(2, 1) has density 2u and E[U^(t-1)] = 2 / (t + 1)
    let beta = Beta::new(2.0, 1.0).unwrap();
    let values: Vec<u32> = (0..20_000)
        .map(|_| Binomial::new((k - 1) as u64, beta.sample(&mut rng)).unwrap().sample(&mut rng) as u32)
        .collect();
    let w = WinCounts::pooled(k, values)?;

    let anchor = w.pooled_accuracy();
    let fit = constrained_pmle(&w, &ConsConfig { anchor: Some(anchor), ..ConsConfig::default() })?;
    println!(
        "objective {:.6}, {} iterations, feasibility {:.1e}",
        fit.objective, fit.diagnostics.iterations, fit.diagnostics.feasibility
    );
    for t in [2, 5, 20, 40, 100] {
        println!("t = {t:>3}: estimate {:.4}, true {:.4}", density_moment(&fit.density, t), 2.0 / (t as f64 + 1.0));
    }

    // a classifier that never errs leaves nothing to fit
    let perfect = WinCounts::pooled(k, vec![k as u32 - 1; 500])?;
    let anchor = perfect.pooled_accuracy();
    match constrained_pmle(&perfect, &ConsConfig { anchor: Some(anchor), ..ConsConfig::default() }) {
        Ok(_) => println!("unexpected estimate"),
        Err(e) => println!("all-wins input: {e}"),
    }
    Ok(())
}
