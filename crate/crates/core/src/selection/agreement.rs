use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{ScoreRow, ScoreTable};
use crate::strategy::{StrategyId, NUM_STRATEGIES};

/// Percentile used for "important sample" thresholds.
pub const AGREEMENT_PERCENTILE: f64 = 0.75;

/// Per-strategy thresholds over normalized pool scores; a sample is
/// important for strategy `j` when its score is strictly above `thresholds[j]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementThresholds {
    pub thresholds: [f64; NUM_STRATEGIES],
}

/// Linear-interpolation percentile (position `q * (n - 1)` in sorted order).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn agreement_thresholds(table: &ScoreTable, pool: &[usize]) -> Result<AgreementThresholds> {
    let columns = StrategyId::ALL.map(|j| table.normalized_column(j, pool));
    AgreementThresholds::from_columns(&columns)
}

impl AgreementThresholds {
    /// Thresholds from four equally long columns of normalized scores.
    pub fn from_columns(columns: &[Vec<f64>; NUM_STRATEGIES]) -> Result<Self> {
        let n = columns[0].len();
        if n < 4 || columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "agreement thresholds need four equal columns of at least 4 scores, got {n}"
            )));
        }
        Ok(Self {
            thresholds: std::array::from_fn(|j| percentile(&columns[j], AGREEMENT_PERCENTILE)),
        })
    }

    pub fn flags(&self, row: &ScoreRow) -> [bool; NUM_STRATEGIES] {
        std::array::from_fn(|j| row[j] > self.thresholds[j])
    }

    /// Samples flagged per strategy, and samples flagged by two or more.
    pub fn summary<'a>(&self, rows: impl IntoIterator<Item = &'a ScoreRow>) -> ([usize; NUM_STRATEGIES], usize) {
        let mut per = [0; NUM_STRATEGIES];
        let mut agree = 0;
        for row in rows {
            let f = self.flags(row);
            for j in 0..NUM_STRATEGIES {
                per[j] += f[j] as usize;
            }
            if f.iter().filter(|&&x| x).count() >= 2 {
                agree += 1;
            }
        }
        (per, agree)
    }
}
