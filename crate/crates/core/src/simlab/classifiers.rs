use nalgebra::{DMatrix, DVector};

use super::config::{ClassifierKind, ClassifierSpec};
use super::ensemble::ClassEnsemble;
use crate::accuracy::ScoreMatrix;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A fitted per-class scoring function.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassModel {
    /// `-(y - mu)^T S^-1 (y - mu) - log det S`, with `S = L L^T`.
    Qda { mean: DVector<f64>, factor: DMatrix<f64>, log_det: f64 },
    /// Sum of per-coordinate Gaussian log densities.
    Gnb { mean: DVector<f64>, var: DVector<f64> },
    /// `-||y - mu||^2`.
    Centroid { mean: DVector<f64> },
}

fn sample_mean(train: &[DVector<f64>]) -> DVector<f64> {
    let mut m = DVector::zeros(train[0].len());
    for x in train {
        m += x;
    }
    m / train.len() as f64
}

/// Sample covariance with divisor `r - 1`.
fn sample_covariance(train: &[DVector<f64>], mean: &DVector<f64>) -> DMatrix<f64> {
    let p = mean.len();
    let mut s = DMatrix::zeros(p, p);
    for x in train {
        let d = x - mean;
        s.ger(1.0, &d, &d, 1.0);
    }
    s / (train.len() - 1) as f64
}

fn default_rho(trace: f64, p: usize) -> f64 {
    1e-3 * trace / p as f64
}

impl ClassModel {
    pub fn fit(spec: &ClassifierSpec, train: &[DVector<f64>]) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 training points, got {}", train.len())));
        }
        let mean = sample_mean(train);
        let p = mean.len();
        match spec.kind {
            ClassifierKind::NearestCentroid => Ok(ClassModel::Centroid { mean }),
            ClassifierKind::GaussianNaiveBayes => {
                let mut var = DVector::zeros(p);
                for x in train {
                    var += (x - &mean).map(|d| d * d);
                }
                var /= (train.len() - 1) as f64;
                let rho = spec.rho.unwrap_or_else(|| default_rho(var.sum(), p));
                var.add_scalar_mut(rho);
                if var.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::SingularCovariance { train_size: train.len(), dim: p });
                }
                Ok(ClassModel::Gnb { mean, var })
            }
            ClassifierKind::Qda => {
                let mut s = sample_covariance(train, &mean);
                let rho = spec.rho.unwrap_or_else(|| default_rho(s.trace(), p));
                if rho == 0.0 && train.len() <= p {
                    return Err(Error::SingularCovariance { train_size: train.len(), dim: p });
                }
                for i in 0..p {
                    s[(i, i)] += rho;
                }
                let factor = s
                    .cholesky()
                    .ok_or(Error::SingularCovariance { train_size: train.len(), dim: p })?
                    .l();
                let log_det = 2.0 * factor.diagonal().iter().map(|d| d.ln()).sum::<f64>();
                if !log_det.is_finite() {
                    return Err(Error::SingularCovariance { train_size: train.len(), dim: p });
                }
                Ok(ClassModel::Qda { mean, factor, log_det })
            }
        }
    }

    pub fn score(&self, y: &DVector<f64>) -> f64 {
        match self {
            ClassModel::Centroid { mean } => -(y - mean).norm_squared(),
            ClassModel::Gnb { mean, var } => {
                let mut s = 0.0;
                for i in 0..mean.len() {
                    let d = y[i] - mean[i];
                    s += -0.5 * (LN_2PI + var[i].ln() + d * d / var[i]);
                }
                s
            }
            ClassModel::Qda { mean, factor, log_det } => {
                // forward substitution for L z = y - mu
                let p = mean.len();
                let mut z = vec![0.0; p];
                let mut q = 0.0;
                for i in 0..p {
                    let mut acc = y[i] - mean[i];
                    for (j, zj) in z.iter().enumerate().take(i) {
                        acc -= factor[(i, j)] * zj;
                    }
                    z[i] = acc / factor[(i, i)];
                    q += z[i] * z[i];
                }
                -q - log_det
            }
        }
    }
}

/// QDA score of `y` under a model fitted to `train`.
pub fn qda_score(train: &[DVector<f64>], y: &DVector<f64>, rho: f64) -> Result<f64> {
    Ok(ClassModel::fit(&ClassifierSpec::qda().with_rho(rho), train)?.score(y))
}

/// Gaussian naive Bayes score of `y` under a model fitted to `train`.
pub fn gnb_score(train: &[DVector<f64>], y: &DVector<f64>, rho: f64) -> Result<f64> {
    Ok(ClassModel::fit(&ClassifierSpec::gnb().with_rho(rho), train)?.score(y))
}

/// Models for every class of an ensemble.
pub fn fit_all(ens: &ClassEnsemble, spec: &ClassifierSpec) -> Result<Vec<ClassModel>> {
    ens.classes().iter().map(|c| ClassModel::fit(spec, &c.train)).collect()
}

/// Scores every test point of the subset classes against every subset
/// model. Labels and columns follow the order of `subset` (0-based class
/// indices).
pub fn score_matrix(ens: &ClassEnsemble, spec: &ClassifierSpec, subset: &[usize]) -> Result<ScoreMatrix> {
    let models: Vec<ClassModel> = subset
        .iter()
        .map(|&i| ClassModel::fit(spec, &ens.class(i).train))
        .collect::<Result<_>>()?;
    score_matrix_with(ens, &models, subset)
}

/// Like [`score_matrix`] with models already fitted; `models` is indexed by
/// position in `subset`.
pub fn score_matrix_with(ens: &ClassEnsemble, models: &[ClassModel], subset: &[usize]) -> Result<ScoreMatrix> {
    if subset.len() < 2 {
        return Err(Error::invalid("a score matrix needs at least 2 classes"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= ens.len()) {
        return Err(Error::invalid(format!("class index {bad} outside an ensemble of {}", ens.len())));
    }
    let k = subset.len();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (pos, &i) in subset.iter().enumerate() {
        for y in &ens.class(i).test {
            scores.extend(models.iter().take(k).map(|m| m.score(y)));
            labels.push(pos + 1);
        }
    }
    ScoreMatrix::from_flat(k, scores, labels)
}
