use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Within-class covariance of the simulated classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CovarianceSpec {
    Identity,
    /// Independent coordinates; every class draws its own variances
    /// uniformly from `[lo, hi]`.
    Diagonal { lo: f64, hi: f64 },
    /// One random SPD matrix, generated from `seed` and shared by all
    /// classes. Eigenvalues lie in `[0.5, 2]`.
    RandomSpd { seed: u64 },
}

impl std::str::FromStr for CovarianceSpec {
    type Err = Error;

    /// `identity`, `diagonal:lo:hi` or `spd:seed`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::invalid(format!("covariance {s:?} is not identity, diagonal:lo:hi or spd:seed"));
        match parts.as_slice() {
            ["identity"] => Ok(CovarianceSpec::Identity),
            ["diagonal", lo, hi] => Ok(CovarianceSpec::Diagonal {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            }),
            ["spd", seed] => Ok(CovarianceSpec::RandomSpd { seed: seed.parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }
}

/// The simulated meta-distribution: Gaussian classes with means drawn from
/// `N(0, tau^2 I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfig {
    pub dim: usize,
    pub tau: f64,
    pub covariance: CovarianceSpec,
    /// Training points per class.
    pub train_size: usize,
    /// Test points per class.
    pub test_size: usize,
    /// Classes observed when estimating.
    pub k: usize,
    /// Classes in the full problem.
    #[serde(rename = "K")]
    pub big_k: usize,
    pub seed: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            dim: 10,
            tau: 0.6,
            covariance: CovarianceSpec::Identity,
            train_size: 50,
            test_size: 20,
            k: 10,
            big_k: 50,
            seed: 1,
        }
    }
}

impl MetaConfig {
    /// Checks every field and reports all problems together.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.dim < 1 {
            errs.push("dim must be at least 1".to_string());
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            errs.push(format!("tau must be finite and nonnegative, got {}", self.tau));
        }
        if self.train_size < 2 {
            errs.push(format!("train_size must be at least 2, got {}", self.train_size));
        }
        if self.test_size < 1 {
            errs.push("test_size must be at least 1".to_string());
        }
        if self.k < 2 {
            errs.push(format!("k must be at least 2, got {}", self.k));
        }
        if self.big_k < self.k {
            errs.push(format!("K = {} must be at least k = {}", self.big_k, self.k));
        }
        if let CovarianceSpec::Diagonal { lo, hi } = self.covariance {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                errs.push(format!("diagonal variance range [{lo}, {hi}] must satisfy 0 < lo <= hi"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Qda,
    GaussianNaiveBayes,
    NearestCentroid,
}

/// A generative classifier: each class model is fitted to that class's
/// training data alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Variance shrinkage added to the diagonal. `None` uses
    /// `1e-3 * trace(S) / p` of each class's sample covariance `S`.
    pub rho: Option<f64>,
}

impl ClassifierSpec {
    pub fn qda() -> Self {
        Self { kind: ClassifierKind::Qda, rho: None }
    }

    pub fn gnb() -> Self {
        Self { kind: ClassifierKind::GaussianNaiveBayes, rho: None }
    }

    pub fn nearest_centroid() -> Self {
        Self { kind: ClassifierKind::NearestCentroid, rho: None }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho: Some(rho), ..self }
    }

    pub fn validate(&self) -> Result<()> {
        match self.rho {
            Some(r) if !(r >= 0.0 && r.is_finite()) => Err(Error::invalid(format!("rho must be >= 0, got {r}"))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.kind {
            ClassifierKind::Qda => "qda",
            ClassifierKind::GaussianNaiveBayes => "gnb",
            ClassifierKind::NearestCentroid => "centroid",
        };
        match self.rho {
            Some(r) => write!(f, "{name}:{r}"),
            None => f.write_str(name),
        }
    }
}

impl std::str::FromStr for ClassifierSpec {
    type Err = Error;

    /// `qda`, `gnb` or `centroid`, optionally followed by `:rho`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rho) = match s.split_once(':') {
            Some((n, r)) => {
                (n, Some(r.parse::<f64>().map_err(|_| Error::invalid(format!("bad rho in classifier {s:?}")))?))
            }
            None => (s, None),
        };
        let kind = match name {
            "qda" => ClassifierKind::Qda,
            "gnb" | "naive_bayes" => ClassifierKind::GaussianNaiveBayes,
            "centroid" | "nearest_centroid" => ClassifierKind::NearestCentroid,
            _ => return Err(Error::invalid(format!("unknown classifier {name:?} (expected qda, gnb or centroid)"))),
        };
        let spec = Self { kind, rho };
        spec.validate()?;
        Ok(spec)
    }
}
