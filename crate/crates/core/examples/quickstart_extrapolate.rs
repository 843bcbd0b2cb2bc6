//! Train a classifier on 10 simulated classes and predict its accuracy on 50.
//!
//! Run with `cargo run --release --example quickstart_extrapolate`.

use acx::accuracy::{empirical_accuracy, win_counts, TiePolicy};
use acx::estimators::{extrapolate_all, Estimator, ExtrapolationConfig};
use acx::simlab::{fit_all, sample_ensemble, score_matrix_with, ClassifierSpec, MetaConfig};

fn main() -> acx::Result<()> {
    let cfg = MetaConfig { k: 10, big_k: 50, seed: 7, ..MetaConfig::default() };
    let ens = sample_ensemble(&cfg);
    let models = fit_all(&ens, &ClassifierSpec::qda())?;

    // what we observe: scores of the first 10 classes on their test points
    let small: Vec<usize> = (0..cfg.k).collect();
    let scores = score_matrix_with(&ens, &models[..cfg.k], &small)?;
    let wins = win_counts(&scores, TiePolicy::Strict)?;

    // what we want to predict
    let all: Vec<usize> = (0..cfg.big_k).collect();
    let truth = empirical_accuracy(&score_matrix_with(&ens, &models, &all)?, TiePolicy::Strict)?;

    let reports = extrapolate_all(&wins, &ExtrapolationConfig::up_to(cfg.big_k))?;
    println!("accuracy on {} classes: {:.4}", cfg.k, empirical_accuracy(&scores, TiePolicy::Strict)?);
    println!("accuracy on {} classes: {:.4} (held out)", cfg.big_k, truth);
    for r in &reports {
        if r.estimator == Estimator::Un {
            continue;
        }
        match r.get(cfg.big_k) {
            Some(p) => println!("  {:>4} predicts {p:.4} (error {:+.4})", r.estimator.name(), p - truth),
            None => println!("  {:>4} failed: {:?}", r.estimator.name(), r.diagnostics.warnings),
        }
    }
    Ok(())
}
