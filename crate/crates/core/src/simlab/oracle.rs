//! Monte-Carlo ground truth: conditional accuracy of a fixed class model at a
//! fixed point, expected `t`-class accuracy, and resampled win counts.

use nalgebra::DVector;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use super::classifiers::{fit_all, ClassModel};
use super::config::{ClassifierSpec, MetaConfig};
use super::ensemble::{ClassEnsemble, ClassPrior};
use super::{par_map, rng_stream};
use crate::error::{Error, Result};
use crate::estimators::binomial_ratio;

const BLOCK: usize = 4096;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { mean, se, n }
    }
}

/// Draws competitor classes from the marginal law of fitted class models:
/// fresh parameters from the prior, then a fresh training sample.
#[derive(Debug, Clone)]
pub struct CompetitorSampler {
    prior: ClassPrior,
    train_size: usize,
    spec: ClassifierSpec,
}

impl CompetitorSampler {
    pub fn new(cfg: &MetaConfig, spec: &ClassifierSpec) -> Self {
        Self { prior: ClassPrior::new(cfg), train_size: cfg.train_size, spec: *spec }
    }

    pub fn draw_model(&self, rng: &mut ChaCha8Rng) -> Result<ClassModel> {
        let params = self.prior.draw(rng);
        ClassModel::fit(&self.spec, &params.sample_n(self.train_size, rng))
    }

    /// A fresh class, its fitted model and one test point from it.
    pub fn draw_labelled(&self, rng: &mut ChaCha8Rng) -> Result<(ClassModel, DVector<f64>)> {
        let params = self.prior.draw(rng);
        let model = ClassModel::fit(&self.spec, &params.sample_n(self.train_size, rng))?;
        let y = params.sample(rng);
        Ok((model, y))
    }
}

fn blocks(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(BLOCK)).map(|b| (b, BLOCK.min(n - b * BLOCK))).collect()
}

/// Fraction of `n_mc` fresh competitor classes whose score at `y` falls
/// strictly below the score of the class trained on `train_i`.
pub fn conditional_accuracy_oracle(
    train_i: &[DVector<f64>],
    y: &DVector<f64>,
    cfg: &MetaConfig,
    spec: &ClassifierSpec,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    let model = ClassModel::fit(spec, train_i)?;
    conditional_accuracy_of(&model, y, &CompetitorSampler::new(cfg, spec), n_mc, seed)
}

pub fn conditional_accuracy_of(
    model: &ClassModel,
    y: &DVector<f64>,
    sampler: &CompetitorSampler,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::invalid("n_mc must be at least 1"));
    }
    let own = model.score(y);
    let wins = par_map(blocks(n_mc), |(b, len)| -> Result<usize> {
        let mut rng = rng_stream(seed, b as u64);
        let mut w = 0;
        for _ in 0..len {
            if own > sampler.draw_model(&mut rng)?.score(y) {
                w += 1;
            }
        }
        Ok(w)
    });
    let total: usize = wins.into_iter().sum::<Result<usize>>()?;
    Ok(total as f64 / n_mc as f64)
}

/// Win counts of a fixed model at a fixed point against `n_sets`
/// independent sets of `k - 1` fresh competitors.
pub fn resampled_win_counts(
    model: &ClassModel,
    y: &DVector<f64>,
    sampler: &CompetitorSampler,
    k: usize,
    n_sets: usize,
    seed: u64,
) -> Result<Vec<u32>> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let own = model.score(y);
    let out = par_map(blocks(n_sets), |(b, len)| -> Result<Vec<u32>> {
        let mut rng = rng_stream(seed, b as u64);
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            let mut wins = 0;
            for _ in 0..k - 1 {
                if own > sampler.draw_model(&mut rng)?.score(y) {
                    wins += 1;
                }
            }
            v.push(wins);
        }
        Ok(v)
    });
    let mut all = Vec::with_capacity(n_sets);
    for v in out {
        all.extend(v?);
    }
    Ok(all)
}

/// Monte-Carlo estimates of `E[U^(t-1)]` for each `t` in `ts`, where `U` is
/// the conditional accuracy of a fresh class at a fresh point of that class.
///
/// Each outer draw compares against `n_inner` competitors and uses the
/// U-statistic `C(W, t - 1) / C(n_inner, t - 1)`, which is unbiased for
/// `U^(t-1)` given the outer draw.
pub fn conditional_accuracy_moments(
    cfg: &MetaConfig,
    spec: &ClassifierSpec,
    ts: &[usize],
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if let Some(&t) = ts.iter().find(|&&t| t < 1 || t - 1 > n_inner) {
        return Err(Error::invalid(format!("t = {t} needs 1 <= t <= n_inner + 1 = {}", n_inner + 1)));
    }
    let sampler = CompetitorSampler::new(cfg, spec);
    let draws = par_map((0..n_outer).collect(), |i| -> Result<Vec<f64>> {
        let mut rng = rng_stream(seed, i as u64);
        let (model, y) = sampler.draw_labelled(&mut rng)?;
        let own = model.score(&y);
        let mut w = 0usize;
        for _ in 0..n_inner {
            if own > sampler.draw_model(&mut rng)?.score(&y) {
                w += 1;
            }
        }
        Ok(ts.iter().map(|&t| binomial_ratio(w as f64, t - 1, n_inner)).collect())
    });
    let draws: Vec<Vec<f64>> = draws.into_iter().collect::<Result<_>>()?;
    Ok((0..ts.len())
        .map(|j| McEstimate::from_samples(&draws.iter().map(|d| d[j]).collect::<Vec<_>>()))
        .collect())
}

fn correct(models: &[&ClassModel], own: usize, y: &DVector<f64>) -> bool {
    let s = models[own].score(y);
    models.iter().enumerate().all(|(j, m)| j == own || s > m.score(y))
}

/// Expected `t`-class accuracy over the whole generative hierarchy: every
/// replicate draws `t` fresh classes and one test point per class.
pub fn expected_accuracy_mc(cfg: &MetaConfig, spec: &ClassifierSpec, t: usize, n_rep: usize, seed: u64) -> Result<McEstimate> {
    if t < 1 || n_rep < 1 {
        return Err(Error::invalid("t and n_rep must be at least 1"));
    }
    let sampler = CompetitorSampler::new(cfg, spec);
    let vals = par_map((0..n_rep).collect(), |i| -> Result<f64> {
        let mut rng = rng_stream(seed, i as u64);
        let drawn: Vec<(ClassModel, DVector<f64>)> =
            (0..t).map(|_| sampler.draw_labelled(&mut rng)).collect::<Result<_>>()?;
        let models: Vec<&ClassModel> = drawn.iter().map(|d| &d.0).collect();
        let hits = (0..t).filter(|&c| correct(&models, c, &drawn[c].1)).count();
        Ok(hits as f64 / t as f64)
    });
    Ok(McEstimate::from_samples(&vals.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Accuracy of the ensemble's fitted models on random `t`-subsets of its
/// classes, with fresh test draws from the true class distributions.
pub fn true_accuracy_mc(ens: &ClassEnsemble, spec: &ClassifierSpec, t: usize, n_rep: usize, seed: u64) -> Result<McEstimate> {
    let big_k = ens.len();
    if t < 1 || t > big_k {
        return Err(Error::invalid(format!("t = {t} must lie in 1..={big_k}")));
    }
    if n_rep < 1 {
        return Err(Error::invalid("n_rep must be at least 1"));
    }
    let models = fit_all(ens, spec)?;
    let vals = par_map((0..n_rep).collect(), |i| {
        let mut rng = rng_stream(seed, i as u64);
        let subset = index::sample(&mut rng, big_k, t).into_vec();
        let chosen: Vec<&ClassModel> = subset.iter().map(|&c| &models[c]).collect();
        let hits = subset
            .iter()
            .enumerate()
            .filter(|&(pos, &c)| correct(&chosen, pos, &ens.class(c).params.sample(&mut rng)))
            .count();
        hits as f64 / t as f64
    });
    Ok(McEstimate::from_samples(&vals))
}
