//! The four scoring strategies and simplex weights over them.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_STRATEGIES: usize = 4;

/// Tolerance for "sums to one".
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    Uncertainty,
    Diversity,
    ClassBalance,
    Boundary,
}

impl StrategyId {
    /// Fixed order U, D, C, B; column order of every score table.
    pub const ALL: [StrategyId; NUM_STRATEGIES] = [
        StrategyId::Uncertainty,
        StrategyId::Diversity,
        StrategyId::ClassBalance,
        StrategyId::Boundary,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// One-letter tag used in CSV column names.
    pub fn tag(self) -> &'static str {
        match self {
            StrategyId::Uncertainty => "u",
            StrategyId::Diversity => "d",
            StrategyId::ClassBalance => "c",
            StrategyId::Boundary => "b",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StrategyId::Uncertainty => "uncertainty",
            StrategyId::Diversity => "diversity",
            StrategyId::ClassBalance => "class_balance",
            StrategyId::Boundary => "boundary",
        };
        f.write_str(name)
    }
}

/// A point on the 4-simplex: nonnegative, summing to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; NUM_STRATEGIES]", into = "[f64; NUM_STRATEGIES]")]
pub struct StrategyWeights([f64; NUM_STRATEGIES]);

impl StrategyWeights {
    pub const UNIFORM: StrategyWeights = StrategyWeights([0.25; NUM_STRATEGIES]);

    pub fn new(w: [f64; NUM_STRATEGIES]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::OffSimplex(w.to_vec()));
        }
        Ok(Self(w))
    }

    /// Divides by the sum. Fails when entries are negative or all zero.
    pub fn normalized(w: [f64; NUM_STRATEGIES]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !(sum > 0.0) {
            return Err(Error::OffSimplex(w.to_vec()));
        }
        Ok(Self(w.map(|v| v / sum)))
    }

    /// Puts all mass on one strategy.
    pub fn single(j: StrategyId) -> Self {
        let mut w = [0.0; NUM_STRATEGIES];
        w[j.index()] = 1.0;
        Self(w)
    }

    pub fn as_array(&self) -> &[f64; NUM_STRATEGIES] {
        &self.0
    }

    pub fn get(&self, j: StrategyId) -> f64 {
        self.0[j.index()]
    }

    pub fn l2_distance(&self, other: &StrategyWeights) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn argmax(&self) -> StrategyId {
        let mut best = 0;
        for j in 1..NUM_STRATEGIES {
            if self.0[j] > self.0[best] {
                best = j;
            }
        }
        StrategyId::ALL[best]
    }
}

impl Default for StrategyWeights {
    fn default() -> Self {
        Self::UNIFORM
    }
}

impl Index<usize> for StrategyWeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<[f64; NUM_STRATEGIES]> for StrategyWeights {
    type Error = Error;
    fn try_from(w: [f64; NUM_STRATEGIES]) -> Result<Self> {
        Self::new(w)
    }
}

impl From<StrategyWeights> for [f64; NUM_STRATEGIES] {
    fn from(w: StrategyWeights) -> Self {
        w.0
    }
}
