//! Cross-run comparison tables: final accuracies per method as
//! mean ± sample standard deviation over seeds, in percent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::output::Manifest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub runs: usize,
    pub val_acc_mean: f64,
    pub val_acc_std: f64,
    pub test_acc_mean: Option<f64>,
    pub test_acc_std: Option<f64>,
    /// Mean validation accuracy minus the random baseline's, in points.
    pub delta_vs_random: Option<f64>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per method, `mode` first, the rest alphabetical.
pub fn summarize(manifests: &[Manifest]) -> Vec<ReportRow> {
    let mut groups: BTreeMap<&str, Vec<&Manifest>> = BTreeMap::new();
    for m in manifests {
        groups.entry(m.method.as_str()).or_default().push(m);
    }
    let mut rows: Vec<ReportRow> = groups
        .into_iter()
        .map(|(method, runs)| {
            let val: Vec<f64> = runs.iter().map(|m| 100.0 * m.final_val_accuracy).collect();
            let (val_acc_mean, val_acc_std) = mean_std(&val);
            let test: Option<Vec<f64>> = runs.iter().map(|m| m.final_test_accuracy.map(|a| 100.0 * a)).collect();
            let test_stats = test.map(|t| mean_std(&t));
            ReportRow {
                method: method.to_string(),
                runs: runs.len(),
                val_acc_mean,
                val_acc_std,
                test_acc_mean: test_stats.map(|s| s.0),
                test_acc_std: test_stats.map(|s| s.1),
                delta_vs_random: None,
            }
        })
        .collect();
    if let Some(random) = rows.iter().find(|r| r.method == "random").map(|r| r.val_acc_mean) {
        for r in &mut rows {
            r.delta_vs_random = Some(r.val_acc_mean - random);
        }
    }
    rows.sort_by_key(|r| (r.method != "mode", r.method.clone()));
    rows
}

pub fn render_markdown(rows: &[ReportRow]) -> String {
    let mut s = String::from("| Method | Runs | Val acc (%) | Test acc (%) | Δ vs random |\n");
    s.push_str("|---|---:|---:|---:|---:|\n");
    for r in rows {
        let test = match (r.test_acc_mean, r.test_acc_std) {
            (Some(m), Some(sd)) => format!("{m:.2} ± {sd:.2}"),
            _ => "-".into(),
        };
        let delta = r.delta_vs_random.map_or("-".into(), |d| format!("{d:+.2}"));
        let _ = writeln!(
            s,
            "| {} | {} | {:.2} ± {:.2} | {} | {} |",
            r.method, r.runs, r.val_acc_mean, r.val_acc_std, test, delta
        );
    }
    s
}
