//! Synthetic meta-distributions of Gaussian classes, generative classifiers
//! trained per class, and Monte-Carlo ground truth for the estimators.
//!
//! All randomness is derived from explicit seeds. Parallel units draw from
//! their own generator stream, so results do not depend on scheduling or on
//! the number of threads (`ACX_THREADS` caps it).

mod classifiers;
mod config;
mod ensemble;
mod oracle;
mod replication;
mod stats;

pub use classifiers::{fit_all, gnb_score, qda_score, score_matrix, score_matrix_with, ClassModel};
pub use config::{ClassifierKind, ClassifierSpec, CovarianceSpec, MetaConfig};
pub use ensemble::{sample_ensemble, ClassData, ClassEnsemble, ClassParams, ClassPrior};
pub use oracle::{
    conditional_accuracy_moments, conditional_accuracy_of, conditional_accuracy_oracle, expected_accuracy_mc,
    resampled_win_counts, true_accuracy_mc, CompetitorSampler, McEstimate,
};
pub use replication::{
    read_records_csv, records_csv, run_replication, write_records_csv, ReplicationConfig, ReplicationRecord,
    ReplicationRun, WinCountDump, BENCHMARK,
};
pub use stats::{binomial_gof, GofResult};

use std::sync::OnceLock;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A derived seed for unit `index` of a computation keyed by `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    rng_stream(seed, index).next_u64()
}

/// Thread cap from `ACX_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var("ACX_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_limit() {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

/// Order-preserving parallel map.
pub(crate) fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    pool().install(|| items.into_par_iter().map(f).collect())
}
