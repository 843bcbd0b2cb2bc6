use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ScoreMatrix, WinCounts};
use crate::error::{Error, Result};

/// How an exact tie between the true-class score and a competitor is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TiePolicy {
    /// Ties are an error: continuous scores should never tie.
    #[default]
    Strict,
    /// A tie counts as half a win.
    Half,
    /// Each tie is settled by a coin drawn from a generator seeded here.
    Random(u64),
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(TiePolicy::Strict),
            "half" => Ok(TiePolicy::Half),
            _ => match s.strip_prefix("random") {
                Some("") => Ok(TiePolicy::Random(0)),
                Some(rest) => rest
                    .trim_start_matches([':', '='])
                    .parse()
                    .map(TiePolicy::Random)
                    .map_err(|_| Error::invalid(format!("bad tie policy seed in {s:?}"))),
                None => Err(Error::invalid(format!(
                    "unknown tie policy {s:?} (expected strict, half or random:<seed>)"
                ))),
            },
        }
    }
}

/// Counts, for every test point, how many competitor classes its true class
/// strictly outscores. Repeats are numbered by row order within each class.
pub fn win_counts(s: &ScoreMatrix, tie_policy: TiePolicy) -> Result<WinCounts> {
    let k = s.k();
    let mut per_class = vec![Vec::new(); k];
    let mut rng = match tie_policy {
        TiePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut ties = 0usize;
    for (label, row) in s.rows() {
        let own = row[label - 1];
        let mut wins = 0u32;
        let mut row_ties = 0u32;
        for (c, &other) in row.iter().enumerate() {
            if c + 1 == label {
                continue;
            }
            if own > other {
                wins += 1;
            } else if own == other {
                row_ties += 1;
            }
        }
        ties += row_ties as usize;
        let v = match tie_policy {
            TiePolicy::Strict => wins,
            TiePolicy::Half => 2 * wins + row_ties,
            TiePolicy::Random(_) => {
                let rng = rng.as_mut().unwrap();
                wins + (0..row_ties).filter(|_| rng.random_bool(0.5)).count() as u32
            }
        };
        per_class[label - 1].push(v);
    }
    match tie_policy {
        TiePolicy::Strict if ties > 0 => Err(Error::TieDetected { count: ties }),
        TiePolicy::Half => WinCounts::new_doubled(k, per_class),
        _ => WinCounts::new(k, per_class),
    }
}

/// Per-point conditional accuracy estimates `V / (k - 1)`, grouped by class.
pub fn u_hat(w: &WinCounts) -> Vec<Vec<f64>> {
    let n = w.trials() as f64;
    (0..w.k())
        .map(|i| (0..w.raw()[i].len()).map(|j| w.value(i, j) / n).collect())
        .collect()
}

/// Mean over classes of the per-class rate at which the true class is the
/// strict argmax. Every class must have at least one test point.
pub fn empirical_accuracy(s: &ScoreMatrix, tie_policy: TiePolicy) -> Result<f64> {
    let w = win_counts(s, tie_policy)?;
    let full = (w.k() - 1) as f64;
    let mut sum = 0.0;
    for (i, reps) in w.raw().iter().enumerate() {
        if reps.is_empty() {
            return Err(Error::MissingClass { class: i + 1 });
        }
        let correct = (0..reps.len()).filter(|&j| w.value(i, j) == full).count();
        sum += correct as f64 / reps.len() as f64;
    }
    Ok(sum / w.k() as f64)
}
