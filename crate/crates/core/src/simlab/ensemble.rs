use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{CovarianceSpec, MetaConfig};
use super::rng_stream;

/// True parameters of one class: `N(mean, L L^T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    pub mean: DVector<f64>,
    /// Lower-triangular factor of the covariance.
    pub cov_factor: DMatrix<f64>,
}

impl ClassParams {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.cov_factor * self.cov_factor.transpose()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.cov_factor * z
    }

    pub fn sample_n(&self, n: usize, rng: &mut impl Rng) -> Vec<DVector<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// The prior over class parameters implied by a [`MetaConfig`].
#[derive(Debug, Clone)]
pub struct ClassPrior {
    dim: usize,
    tau: f64,
    covariance: CovarianceSpec,
    shared_factor: Option<DMatrix<f64>>,
}

impl ClassPrior {
    pub fn new(cfg: &MetaConfig) -> Self {
        let shared_factor = match cfg.covariance {
            CovarianceSpec::Identity => Some(DMatrix::identity(cfg.dim, cfg.dim)),
            CovarianceSpec::Diagonal { .. } => None,
            CovarianceSpec::RandomSpd { seed } => Some(random_spd_factor(cfg.dim, seed)),
        };
        Self { dim: cfg.dim, tau: cfg.tau, covariance: cfg.covariance, shared_factor }
    }

    pub fn draw(&self, rng: &mut impl Rng) -> ClassParams {
        let mean = DVector::from_fn(self.dim, |_, _| self.tau * rng.sample::<f64, _>(StandardNormal));
        let cov_factor = match (&self.shared_factor, self.covariance) {
            (Some(f), _) => f.clone(),
            (None, CovarianceSpec::Diagonal { lo, hi }) => {
                DMatrix::from_diagonal(&DVector::from_fn(self.dim, |_, _| rng.random_range(lo..=hi).sqrt()))
            }
            (None, _) => unreachable!("shared factor is set for non-diagonal covariances"),
        };
        ClassParams { mean, cov_factor }
    }
}

/// `Q diag(lambda) Q^T` with a random orthogonal `Q` and eigenvalues spread
/// over `[0.5, 2]`; returns its Cholesky factor.
fn random_spd_factor(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_stream(seed, 0);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let lambda = DVector::from_fn(dim, |i, _| {
        if dim == 1 {
            1.0
        } else {
            0.5 * 4f64.powf(i as f64 / (dim - 1) as f64)
        }
    });
    let sigma = &q * DMatrix::from_diagonal(&lambda) * q.transpose();
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    sigma.cholesky().expect("eigenvalues are at least 0.5").l()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassData {
    pub params: ClassParams,
    pub train: Vec<DVector<f64>>,
    pub test: Vec<DVector<f64>>,
    /// Stream index of the generator that produced this class.
    pub stream: u64,
}

/// `K` classes with their training and held-out test samples. Immutable once
/// built.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEnsemble {
    classes: Vec<ClassData>,
}

impl ClassEnsemble {
    pub fn from_classes(classes: Vec<ClassData>) -> Self {
        Self { classes }
    }

    /// Builds an ensemble from given class parameters, sampling training and
    /// test points from stream `i` of `seed` for class `i`.
    pub fn from_params(params: Vec<ClassParams>, train_size: usize, test_size: usize, seed: u64) -> Self {
        let classes = params
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = rng_stream(seed, i as u64);
                let train = p.sample_n(train_size, &mut rng);
                let test = p.sample_n(test_size, &mut rng);
                ClassData { params: p, train, test, stream: i as u64 }
            })
            .collect();
        Self { classes }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[ClassData] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &ClassData {
        &self.classes[i]
    }

    pub fn dim(&self) -> usize {
        self.classes.first().map_or(0, |c| c.params.dim())
    }
}

/// Draws `K` classes i.i.d. from the configured prior. Class `i` uses its own
/// generator stream, so the result does not depend on evaluation order.
pub fn sample_ensemble(cfg: &MetaConfig) -> ClassEnsemble {
    let prior = ClassPrior::new(cfg);
    let classes = (0..cfg.big_k)
        .map(|i| {
            let mut rng: ChaCha8Rng = rng_stream(cfg.seed, i as u64);
            let params = prior.draw(&mut rng);
            let train = params.sample_n(cfg.train_size, &mut rng);
            let test = params.sample_n(cfg.test_size, &mut rng);
            ClassData { params, train, test, stream: i as u64 }
        })
        .collect();
    ClassEnsemble { classes }
}
