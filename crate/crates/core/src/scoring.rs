//! Per-sample strategy scores, min-max normalization and the selective
//! recomputation cache.
//!
//! The four scores have different invalidation triggers:
//!
//! - uncertainty and boundary depend only on the probe, so they are
//!   recomputed when the model version changes and served from cache
//!   otherwise;
//! - diversity is the distance to the nearest coreset member, so adding a
//!   batch only requires comparing the pool against that batch;
//! - class balance depends on coreset class counts, which are updated from
//!   the batch histogram.
//!
//! [`ScoreTable`] with caching disabled recomputes everything from scratch
//! each round. Both paths produce bit-identical scores.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{class_frequencies, Dataset};
use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::probe::ProbeModel;
use crate::strategy::{StrategyId, StrategyWeights, NUM_STRATEGIES};

/// Raw score row, columns in [`StrategyId::ALL`] order.
pub type ScoreRow = [f64; NUM_STRATEGIES];

const DIST_TOL: f64 = 1e-6;

fn check_distribution(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > DIST_TOL || probs.iter().any(|p| !(*p >= -1e-12 && *p <= 1.0 + 1e-12)) {
        return Err(Error::NotADistribution { sum });
    }
    Ok(())
}

/// Natural-log entropy of a class distribution.
pub fn score_uncertainty(probs: &[f64]) -> Result<f64> {
    check_distribution(probs)?;
    Ok(entropy(probs))
}

fn entropy(probs: &[f64]) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    h.max(0.0)
}

/// One minus the gap between the two largest probabilities.
pub fn score_boundary(probs: &[f64]) -> Result<f64> {
    if probs.len() < 2 {
        return Err(Error::InvalidArgument("boundary score needs at least two classes".into()));
    }
    check_distribution(probs)?;
    Ok(margin(probs))
}

fn margin(probs: &[f64]) -> f64 {
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in probs {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    (1.0 - (first - second)).clamp(0.0, 1.0)
}

/// `1 / (count of label in the coreset + smoothing)`.
pub fn score_class_balance(label: usize, coreset_counts: &[f64], smoothing: f64) -> f64 {
    1.0 / (coreset_counts[label] + smoothing)
}

/// Min-max scaling to `[0, 1]`; a constant column maps to 0.5.
pub fn normalize_column(raw: &[f64]) -> Vec<f64> {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.5; raw.len()];
    }
    raw.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

/// Weighted sum of normalized scores.
pub fn combined_score(normalized: &ScoreRow, weights: &StrategyWeights) -> f64 {
    normalized
        .iter()
        .zip(weights.as_array())
        .map(|(s, w)| s * w)
        .sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub model_hits: u64,
    pub model_misses: u64,
    /// Embedding distance evaluations spent maintaining diversity scores.
    pub distance_evals: u64,
}

#[derive(Clone, Debug)]
pub struct ScoreTable {
    raw: Vec<ScoreRow>,
    normalized: Vec<ScoreRow>,
    model_version: Option<u64>,
    coreset_version: u64,
    /// Distance to the nearest coreset member; infinite while the coreset is empty.
    min_dist: Vec<f64>,
    class_counts: Vec<f64>,
    smoothing: f64,
    caching: bool,
    stats: CacheStats,
}

impl ScoreTable {
    pub fn new(n: usize, classes: usize, smoothing: f64, caching: bool) -> Self {
        Self {
            raw: vec![[0.0; NUM_STRATEGIES]; n],
            normalized: vec![[0.0; NUM_STRATEGIES]; n],
            model_version: None,
            coreset_version: 0,
            min_dist: vec![f64::INFINITY; n],
            class_counts: vec![0.0; classes],
            smoothing,
            caching,
            stats: CacheStats::default(),
        }
    }

    pub fn caching(&self) -> bool {
        self.caching
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn model_version(&self) -> Option<u64> {
        self.model_version
    }

    pub fn coreset_version(&self) -> u64 {
        self.coreset_version
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.class_counts
    }

    pub fn min_dist(&self) -> &[f64] {
        &self.min_dist
    }

    pub fn raw(&self, i: usize) -> &ScoreRow {
        &self.raw[i]
    }

    pub fn normalized(&self, i: usize) -> &ScoreRow {
        &self.normalized[i]
    }

    pub fn normalized_column(&self, j: StrategyId, pool: &[usize]) -> Vec<f64> {
        pool.iter().map(|&i| self.normalized[i][j.index()]).collect()
    }

    /// Recomputes uncertainty and boundary for `pool` unless the cached
    /// columns already belong to this model version. Returns whether work
    /// was done.
    pub fn refresh_model_scores(&mut self, model: &ProbeModel, ds: &Dataset, pool: &[usize]) -> bool {
        if self.caching && self.model_version == Some(model.version()) {
            self.stats.model_hits += 1;
            return false;
        }
        let fresh: Vec<(f64, f64)> = pool
            .par_iter()
            .map(|&i| {
                let p = model.proba(ds.row(i));
                (entropy(&p), margin(&p))
            })
            .collect();
        for (&i, (u, b)) in pool.iter().zip(fresh) {
            self.raw[i][StrategyId::Uncertainty.index()] = u;
            self.raw[i][StrategyId::Boundary.index()] = b;
        }
        self.model_version = Some(model.version());
        self.stats.model_misses += 1;
        true
    }

    /// Folds a newly committed batch into the nearest-coreset distances,
    /// touching only pool x batch pairs.
    pub fn update_diversity_cache(&mut self, emb: &Embeddings, batch: &[usize], pool: &[usize]) {
        if batch.is_empty() {
            return;
        }
        let updated: Vec<f64> = pool
            .par_iter()
            .map(|&i| {
                batch
                    .iter()
                    .map(|&b| emb.distance(i, b))
                    .fold(self.min_dist[i], f64::min)
            })
            .collect();
        for (&i, d) in pool.iter().zip(updated) {
            self.min_dist[i] = d;
        }
        self.stats.distance_evals += (pool.len() * batch.len()) as u64;
        self.coreset_version += 1;
    }

    /// Naive nearest-coreset distances over the whole coreset.
    pub fn recompute_diversity(&mut self, emb: &Embeddings, coreset: &[usize], pool: &[usize]) {
        let fresh: Vec<f64> = pool
            .par_iter()
            .map(|&i| {
                coreset
                    .iter()
                    .map(|&c| emb.distance(i, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        for (&i, d) in pool.iter().zip(fresh) {
            self.min_dist[i] = d;
        }
        self.stats.distance_evals += (pool.len() * coreset.len()) as u64;
        self.coreset_version += 1;
    }

    /// Adds the batch label histogram to the coreset class counts.
    pub fn update_class_counts(&mut self, batch_labels: &[usize]) {
        for &y in batch_labels {
            self.class_counts[y] += 1.0;
        }
    }

    pub fn recount_class_counts(&mut self, ds: &Dataset, coreset: &[usize]) {
        self.class_counts = class_frequencies(ds, coreset);
    }

    /// Applies a batch that was just moved from the pool into the coreset.
    /// `coreset` and `pool` are the sets after the move.
    pub fn commit_batch(&mut self, ds: &Dataset, emb: &Embeddings, batch: &[usize], coreset: &[usize], pool: &[usize]) {
        if self.caching {
            self.update_diversity_cache(emb, batch, pool);
            let labels: Vec<usize> = batch.iter().map(|&i| ds.label(i)).collect();
            self.update_class_counts(&labels);
        } else {
            self.recompute_diversity(emb, coreset, pool);
            self.recount_class_counts(ds, coreset);
        }
    }

    /// Cached diversity score for sample `i`. `expected_version` must match
    /// the table's coreset version.
    pub fn score_diversity(&self, i: usize, expected_version: u64) -> Result<f64> {
        if expected_version != self.coreset_version {
            return Err(Error::StaleCache {
                table: self.coreset_version,
                expected: expected_version,
            });
        }
        Ok(self.min_dist[i])
    }

    /// Fills the diversity and class-balance columns for `pool` and
    /// normalizes all four columns over `pool`.
    pub fn finalize(&mut self, ds: &Dataset, pool: &[usize]) {
        let d = StrategyId::Diversity.index();
        let c = StrategyId::ClassBalance.index();
        for &i in pool {
            self.raw[i][d] = self.min_dist[i];
            self.raw[i][c] = score_class_balance(ds.label(i), &self.class_counts, self.smoothing);
        }
        for j in StrategyId::ALL {
            let col: Vec<f64> = pool.iter().map(|&i| self.raw[i][j.index()]).collect();
            let norm = if j == StrategyId::Diversity {
                normalize_distances(&col)
            } else {
                normalize_column(&col)
            };
            for (&i, v) in pool.iter().zip(norm) {
                self.normalized[i][j.index()] = v;
            }
        }
    }

    /// Refreshes model scores, then [`ScoreTable::finalize`].
    pub fn prepare(&mut self, model: &ProbeModel, ds: &Dataset, pool: &[usize]) {
        self.refresh_model_scores(model, ds, pool);
        self.finalize(ds, pool);
    }

    pub fn combined(&self, pool: &[usize], weights: &StrategyWeights) -> Vec<f64> {
        pool.iter().map(|&i| combined_score(&self.normalized[i], weights)).collect()
    }
}

/// Like [`normalize_column`], but infinite distances (empty coreset) map to 1.
fn normalize_distances(raw: &[f64]) -> Vec<f64> {
    if raw.iter().all(|v| v.is_finite()) {
        return normalize_column(raw);
    }
    let finite: Vec<f64> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    let scaled = normalize_column(&finite);
    let mut it = scaled.into_iter();
    raw.iter()
        .map(|v| if v.is_finite() { it.next().unwrap_or(1.0) } else { 1.0 })
        .collect()
}
