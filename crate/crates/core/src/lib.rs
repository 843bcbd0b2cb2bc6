//! Predicting how a classifier's accuracy changes as the label set grows.
//!
//! Given top-1 results on `k` classes, the estimators here predict the
//! expected accuracy on a larger set of `K` classes drawn from the same
//! population:
//!
//! - [`estimators::unbiased_moments`]: unbiased accuracy for every `t <= k`.
//! - [`estimators::exp_extrapolate`]: nonnegative mixture of decaying
//!   exponentials fitted to those moments.
//! - [`estimators::constrained_pmle`]: monotone density of the per-item win
//!   rate, fitted by pseudolikelihood with its `k`-th moment pinned.
//! - [`estimators::hd_extrapolate`]: a one-parameter Gaussian margin model.
//!
//! [`estimators::extrapolate_all`] runs any subset of them on one
//! [`accuracy::WinCounts`]. The [`simlab`] module generates synthetic
//! studies with known ground truth, and [`cli`] backs the `acx` binary.
//!
//! ```
//! use acx::accuracy::WinCounts;
//! use acx::estimators::{extrapolate_all, ExtrapolationConfig};
//!
//! // wins out of k - 1 = 4 pairwise comparisons, one entry per test item
//! let w = WinCounts::pooled(5, vec![4, 4, 3, 4, 2, 4, 1, 4, 3, 0]).unwrap();
//! let reports = extrapolate_all(&w, &ExtrapolationConfig::up_to(20)).unwrap();
//! for r in &reports {
//!     println!("{}: {:?}", r.estimator, r.get(20));
//! }
//! ```

pub mod accuracy;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod simlab;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
