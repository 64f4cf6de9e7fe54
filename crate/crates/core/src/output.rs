//! Run artifacts: `selected.csv`, `rounds.csv`, `weights.csv`, optional
//! per-round score dumps, and `manifest.json`.
//!
//! Every CSV row type derives both `Serialize` and `Deserialize` so files
//! read back to the values that were written.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{RoundLog, ScoreDump, SelectionRun};

pub const SELECTED_FILE: &str = "selected.csv";
pub const ROUNDS_FILE: &str = "rounds.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn scores_file(round: usize) -> String {
    format!("scores_round_{round:03}.csv")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedRow {
    pub round: usize,
    pub sample_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: usize,
    pub coreset_size: usize,
    pub batch_size: usize,
    pub val_acc_before: f64,
    pub val_acc: f64,
    pub grad_norm: f64,
    pub temp: f64,
    pub gain_u: f64,
    pub gain_d: f64,
    pub gain_c: f64,
    pub gain_b: f64,
    pub alpha_u: f64,
    pub alpha_d: f64,
    pub alpha_c: f64,
    pub alpha_b: f64,
    pub flagged_u: Option<usize>,
    pub flagged_d: Option<usize>,
    pub flagged_c: Option<usize>,
    pub flagged_b: Option<usize>,
    pub agreement: Option<usize>,
    pub model_cache_hits: u64,
    pub model_cache_misses: u64,
    pub distance_evals: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub round: usize,
    pub temp: f64,
    pub w_u: f64,
    pub w_d: f64,
    pub w_c: f64,
    pub w_b: f64,
    pub r_u: f64,
    pub r_d: f64,
    pub r_c: f64,
    pub r_b: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreCsvRow {
    pub sample_id: usize,
    pub s_u: f64,
    pub s_d: f64,
    pub s_c: f64,
    pub s_b: f64,
    pub s_u_norm: f64,
    pub s_d_norm: f64,
    pub s_c_norm: f64,
    pub s_b_norm: f64,
    pub combined: f64,
}

impl From<&ScoreDump> for ScoreCsvRow {
    fn from(d: &ScoreDump) -> Self {
        Self {
            sample_id: d.sample_id,
            s_u: d.raw[0],
            s_d: d.raw[1],
            s_c: d.raw[2],
            s_b: d.raw[3],
            s_u_norm: d.normalized[0],
            s_d_norm: d.normalized[1],
            s_c_norm: d.normalized[2],
            s_b_norm: d.normalized[3],
            combined: d.combined,
        }
    }
}

pub fn selected_rows(run: &SelectionRun) -> Vec<SelectedRow> {
    run.rounds
        .iter()
        .flat_map(|r| {
            r.batch.iter().map(move |&sample_id| SelectedRow {
                round: r.round,
                sample_id,
            })
        })
        .collect()
}

pub fn round_row(r: &RoundLog) -> RoundRow {
    let f = r.flagged.map(|f| f.map(Some)).unwrap_or([None; 4]);
    RoundRow {
        round: r.round,
        coreset_size: r.coreset_size,
        batch_size: r.batch.len(),
        val_acc_before: r.base_val_accuracy,
        val_acc: r.val_accuracy,
        grad_norm: r.grad_norm,
        temp: r.temperature,
        gain_u: r.gains[0],
        gain_d: r.gains[1],
        gain_c: r.gains[2],
        gain_b: r.gains[3],
        alpha_u: r.alpha[0],
        alpha_d: r.alpha[1],
        alpha_c: r.alpha[2],
        alpha_b: r.alpha[3],
        flagged_u: f[0],
        flagged_d: f[1],
        flagged_c: f[2],
        flagged_b: f[3],
        agreement: r.agreement,
        model_cache_hits: r.model_cache_hits,
        model_cache_misses: r.model_cache_misses,
        distance_evals: r.distance_evals,
        wall_ms: r.wall_time_ms,
    }
}

pub fn weight_row(r: &RoundLog) -> WeightRow {
    let w = r.weights.as_array();
    WeightRow {
        round: r.round,
        temp: r.temperature,
        w_u: w[0],
        w_d: w[1],
        w_c: w[2],
        w_b: w[3],
        r_u: r.rewards[0],
        r_d: r.rewards[1],
        r_c: r.rewards[2],
        r_b: r.rewards[3],
        val_acc: r.val_accuracy,
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Emit rows to an in-memory CSV string.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv_str<T: DeserializeOwned>(s: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(s.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
    pub samples: usize,
    pub dim: usize,
    pub classes: usize,
    pub standardized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub method: String,
    pub seed: u64,
    pub budget: usize,
    pub rounds: usize,
    pub embedding_space: String,
    pub dataset: DatasetInfo,
    pub final_val_accuracy: f64,
    pub final_val_recall: Vec<f64>,
    pub final_test_accuracy: Option<f64>,
    /// The full run configuration as loaded.
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes every artifact of `run` into `dir`, which must already exist.
pub fn write_run(dir: &Path, run: &SelectionRun, manifest: &Manifest) -> Result<()> {
    write_rows(&dir.join(SELECTED_FILE), &selected_rows(run))?;
    let rounds: Vec<RoundRow> = run.rounds.iter().map(round_row).collect();
    write_rows(&dir.join(ROUNDS_FILE), &rounds)?;
    let weights: Vec<WeightRow> = run.rounds.iter().map(weight_row).collect();
    write_rows(&dir.join(WEIGHTS_FILE), &weights)?;
    for r in &run.rounds {
        if let Some(scores) = &r.scores {
            let rows: Vec<ScoreCsvRow> = scores.iter().map(ScoreCsvRow::from).collect();
            write_rows(&dir.join(scores_file(r.round)), &rows)?;
        }
    }
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optional_columns_roundtrip() {
        let rows = vec![
            WeightRow {
                round: 0,
                temp: 1.0,
                w_u: 0.25,
                w_d: 0.25,
                w_c: 0.25,
                w_b: 0.25,
                r_u: 0.0,
                r_d: 0.0,
                r_c: 0.0,
                r_b: 0.0,
                val_acc: 0.1 + 0.2,
            },
        ];
        let text = to_csv_string(&rows).unwrap();
        assert!(text.starts_with("round,temp,w_u,w_d,w_c,w_b,r_u,r_d,r_c,r_b,val_acc\n"));
        assert_eq!(from_csv_str::<WeightRow>(&text).unwrap(), rows);
    }
}
