//! Synthetic Gaussian-mixture datasets.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{largest_remainder, Dataset};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Isotropic Gaussian mixture with one unit-variance component per class.
///
/// Class means are random directions scaled to norm `separation`. Class `c`
/// has relative size `imbalance^(-c / (C - 1))`, so `imbalance = 9` with two
/// classes gives a 90/10 split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub classes: usize,
    pub n: usize,
    pub dim: usize,
    pub separation: f64,
    pub imbalance: f64,
    pub seed: u64,
}

impl Default for GaussianMixture {
    fn default() -> Self {
        Self {
            classes: 3,
            n: 300,
            dim: 2,
            separation: 3.0,
            imbalance: 1.0,
            seed: 0,
        }
    }
}

impl GaussianMixture {
    pub fn class_sizes(&self) -> Vec<usize> {
        let c = self.classes;
        // relative weights scaled to integers with plenty of resolution
        let weights: Vec<usize> = (0..c)
            .map(|k| {
                let w = self.imbalance.powf(-(k as f64) / (c - 1) as f64);
                (w * 1e6).round() as usize
            })
            .collect();
        largest_remainder(&weights, self.n)
    }

    pub fn generate(&self) -> Result<Dataset> {
        if self.classes < 2 || self.dim == 0 || self.n < self.classes {
            return Err(Error::InvalidArgument(format!(
                "mixture needs classes >= 2, dim >= 1, n >= classes (got {self:?})"
            )));
        }
        if !(self.imbalance >= 1.0) || !(self.separation >= 0.0) {
            return Err(Error::InvalidArgument("imbalance must be >= 1 and separation >= 0".into()));
        }
        let mut rng = rng_from_seed(self.seed);
        let means: Vec<Vec<f64>> = (0..self.classes)
            .map(|_| {
                let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.into_iter().map(|x| x / norm * self.separation).collect()
            })
            .collect();

        let mut labels: Vec<usize> = self
            .class_sizes()
            .into_iter()
            .enumerate()
            .flat_map(|(c, size)| std::iter::repeat_n(c, size))
            .collect();
        labels.shuffle(&mut rng);

        let mut features = Vec::with_capacity(self.n * self.dim);
        for &y in &labels {
            for mu in &means[y] {
                let z: f64 = StandardNormal.sample(&mut rng);
                features.push(mu + z);
            }
        }
        Dataset::new(features, self.dim, labels, self.classes)
    }
}
