//! Shared data model: score matrices, win counts, moment curves and the two
//! representations of the conditional-accuracy law (a discretized density on
//! `(0, 1)` and a decay mixture on `[0, ∞)`).
//!
//! Win counts use `k - 1` Bernoulli trials per test point throughout: `V` is a
//! sum of `k - 1` pairwise comparisons, so given the conditional accuracy `u`
//! it is `Binomial(k - 1, u)`.

mod io;
mod wins;

pub use io::{
    parse_input, parse_score_matrix, parse_win_counts, read_input, read_score_matrix,
    read_win_counts, write_score_matrix, write_win_counts, Input,
};
pub use wins::{empirical_accuracy, u_hat, win_counts, TiePolicy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-test-point classification scores against every class, with 1-based
/// true labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    k: usize,
    scores: Vec<f64>,
    labels: Vec<usize>,
}

impl ScoreMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let k = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::invalid(format!(
                "row {} has {} scores, expected {k}",
                i + 1,
                row.len()
            )));
        }
        Self::from_flat(k, rows.into_iter().flatten().collect(), labels)
    }

    /// Builds from a row-major `n_test x k` buffer.
    pub fn from_flat(k: usize, scores: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {k}")));
        }
        if labels.is_empty() {
            return Err(Error::invalid("score matrix has no test points"));
        }
        if scores.len() != labels.len() * k {
            return Err(Error::invalid(format!(
                "score buffer has {} entries, expected {} x {k}",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| l == 0 || l > k) {
            return Err(Error::invalid(format!(
                "label {} on row {} outside 1..={k}",
                labels[pos],
                pos + 1
            )));
        }
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite score at row {}, column {}",
                pos / k + 1,
                pos % k + 1
            )));
        }
        Ok(Self { k, scores, labels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_test(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.k..(i + 1) * self.k]
    }

    /// 1-based true label of row `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.labels.iter().copied().zip(self.scores.chunks_exact(self.k))
    }

    /// Argmax prediction (1-based); the first maximal column wins.
    pub fn predict(&self, i: usize) -> usize {
        let row = self.row(i);
        let mut best = 0;
        for (c, &s) in row.iter().enumerate() {
            if s > row[best] {
                best = c;
            }
        }
        best + 1
    }
}

/// Pairwise win counts `V[i][j]`: how many of the other `k - 1` classes the
/// true class `i` outscored on its `j`-th test point.
///
/// With `doubled` set the stored integers are `2 * wins + ties`, i.e. ties
/// count one half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinCounts {
    k: usize,
    per_class: Vec<Vec<u32>>,
    doubled: bool,
}

impl WinCounts {
    pub fn new(k: usize, per_class: Vec<Vec<u32>>) -> Result<Self> {
        Self::build(k, per_class, false)
    }

    /// Counts stored as `2 * wins + ties`.
    pub fn new_doubled(k: usize, per_class: Vec<Vec<u32>>) -> Result<Self> {
        Self::build(k, per_class, true)
    }

    fn build(k: usize, per_class: Vec<Vec<u32>>, doubled: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {k}")));
        }
        if per_class.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} classes of win counts, got {}",
                per_class.len()
            )));
        }
        let cap = if doubled { 2 * (k as u32 - 1) } else { k as u32 - 1 };
        for (i, reps) in per_class.iter().enumerate() {
            if let Some(j) = reps.iter().position(|&v| v > cap) {
                return Err(Error::invalid(format!(
                    "win count {} for class {}, repeat {} exceeds k - 1 = {}",
                    reps[j],
                    i + 1,
                    j + 1,
                    k - 1
                )));
            }
        }
        if per_class.iter().all(Vec::is_empty) {
            return Err(Error::invalid("win counts contain no observations"));
        }
        Ok(Self { k, per_class, doubled })
    }

    /// Pools a flat list of counts into a single class slot. Handy for
    /// synthetic data where the class structure is irrelevant.
    pub fn pooled(k: usize, values: Vec<u32>) -> Result<Self> {
        let mut per_class = vec![Vec::new(); k];
        per_class[0] = values;
        Self::new(k, per_class)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of Bernoulli trials behind each count.
    pub fn trials(&self) -> usize {
        self.k - 1
    }

    pub fn is_doubled(&self) -> bool {
        self.doubled
    }

    pub fn counts_per_class(&self) -> Vec<usize> {
        self.per_class.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.per_class.iter().map(Vec::len).sum()
    }

    /// Stored integer representation (doubled when `is_doubled`).
    pub fn raw(&self) -> &[Vec<u32>] {
        &self.per_class
    }

    /// Effective win count for (0-based) class `i`, repeat `j`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.scale(self.per_class[i][j])
    }

    fn scale(&self, raw: u32) -> f64 {
        if self.doubled {
            raw as f64 / 2.0
        } else {
            raw as f64
        }
    }

    /// All effective counts in (class, repeat) order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_class.iter().flatten().map(|&v| self.scale(v))
    }

    /// Distinct effective counts with their multiplicities, ascending.
    pub fn histogram(&self) -> Vec<(f64, usize)> {
        let mut raw: Vec<u32> = self.per_class.iter().flatten().copied().collect();
        raw.sort_unstable();
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut last = None;
        for v in raw {
            if last == Some(v) {
                out.last_mut().unwrap().1 += 1;
            } else {
                out.push((self.scale(v), 1));
                last = Some(v);
            }
        }
        out
    }

    /// Fraction of test points whose true class beat every competitor,
    /// pooled over all (class, repeat) pairs.
    pub fn pooled_accuracy(&self) -> f64 {
        let full = if self.doubled { 2 * (self.k as u32 - 1) } else { self.k as u32 - 1 };
        let wins = self.per_class.iter().flatten().filter(|&&v| v == full).count();
        wins as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub t: usize,
    pub p: f64,
}

/// Expected-accuracy estimates indexed by class count.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    entries: Vec<MomentPoint>,
    source_k: usize,
    out_of_range: bool,
}

impl MomentCurve {
    pub fn new(entries: Vec<MomentPoint>, source_k: usize) -> Result<Self> {
        let curve = Self::from_raw(entries, source_k)?;
        if curve.out_of_range {
            return Err(Error::invalid("moment curve value outside [0, 1]"));
        }
        Ok(curve)
    }

    /// Accepts values outside `[0, 1]` and flags them instead of rejecting.
    pub(crate) fn from_raw(entries: Vec<MomentPoint>, source_k: usize) -> Result<Self> {
        if entries.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::invalid("moment curve t values must be strictly increasing"));
        }
        if entries.iter().any(|e| e.t == 0 || !e.p.is_finite()) {
            return Err(Error::invalid("moment curve needs t >= 1 and finite values"));
        }
        let out_of_range = entries.iter().any(|e| !(0.0..=1.0).contains(&e.p));
        Ok(Self { entries, source_k, out_of_range })
    }

    pub fn entries(&self) -> &[MomentPoint] {
        &self.entries
    }

    pub fn source_k(&self) -> usize {
        self.source_k
    }

    /// True when some raw value fell outside `[0, 1]`.
    pub fn out_of_range(&self) -> bool {
        self.out_of_range
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&t, |e| e.t)
            .ok()
            .map(|i| self.entries[i].p)
    }
}

/// Cell masses of the conditional-accuracy density on the midpoint grid
/// `u_r = (r - 1/2) / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDensity {
    weights: Vec<f64>,
    monotone: bool,
}

impl DiscreteDensity {
    pub const SUM_TOL: f64 = 1e-10;
    pub const MONOTONE_TOL: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("density needs at least one grid cell"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("density weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::invalid(format!("density weights sum to {sum}, expected 1")));
        }
        Ok(Self { weights, monotone: false })
    }

    /// Like [`DiscreteDensity::new`] but also checks and records that the
    /// masses are nondecreasing.
    pub fn new_monotone(weights: Vec<f64>) -> Result<Self> {
        let mut d = Self::new(weights)?;
        if d.weights.windows(2).any(|w| w[1] < w[0] - Self::MONOTONE_TOL) {
            return Err(Error::invalid("density weights are not nondecreasing"));
        }
        d.monotone = true;
        Ok(d)
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m], monotone: true }
    }

    /// Discretizes a density height function; heights are normalized to unit
    /// mass.
    pub fn from_heights(m: usize, height: impl Fn(f64) -> f64) -> Result<Self> {
        let raw: Vec<f64> = grid(m).map(height).collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("density heights have no positive mass"));
        }
        Self::new(raw.into_iter().map(|h| h / total).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> {
        grid(self.weights.len())
    }
}

/// Midpoint grid on `(0, 1)` with `m` cells.
pub fn grid(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |r| (r as f64 + 0.5) / m as f64)
}

/// `sum_r w_r u_r^(t-1)`: the plug-in expected accuracy at `t` classes.
pub fn density_moment(d: &DiscreteDensity, t: usize) -> f64 {
    assert!(t >= 1, "density_moment needs t >= 1");
    let e = (t - 1) as i32;
    d.weights
        .iter()
        .zip(d.grid())
        .map(|(w, u)| w * u.powi(e))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayAtom {
    pub rate: f64,
    pub weight: f64,
}

/// Nonnegative mixture of exponential decays, `p(t) = sum_l w_l exp(-kappa_l t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayMixture {
    atoms: Vec<DecayAtom>,
}

impl DecayMixture {
    pub fn new(atoms: Vec<DecayAtom>) -> Result<Self> {
        if atoms
            .iter()
            .any(|a| !(a.rate >= 0.0 && a.weight >= 0.0 && a.rate.is_finite() && a.weight.is_finite()))
        {
            return Err(Error::invalid("decay atoms need finite, nonnegative rates and weights"));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[DecayAtom] {
        &self.atoms
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * (-a.rate * t).exp()).sum()
    }
}
