//! Score table checked against scores recomputed from first principles.

use modesel::dataset::Dataset;
use modesel::embedding::{EmbeddingSpace, Embeddings};
use modesel::probe::ProbeModel;
use modesel::scoring::{combined_score, normalize_column, score_boundary, score_class_balance, score_uncertainty, ScoreTable};
use modesel::strategy::{StrategyId, StrategyWeights};
use modesel::synth::GaussianMixture;
use proptest::prelude::*;

fn oracle_minmax(col: &[f64]) -> Vec<f64> {
    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    col.iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

/// Raw scores for one pool sample, computed without any cache.
fn oracle_raw(ds: &Dataset, model: &ProbeModel, coreset: &[usize], i: usize, smoothing: f64) -> [f64; 4] {
    let p = model.predict_proba(ds.row(i)).unwrap();
    let h: f64 = p.iter().filter(|&&q| q > 0.0).map(|q| -q * q.ln()).sum();
    let mut sorted = p.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let dist = coreset
        .iter()
        .map(|&c| {
            ds.row(i)
                .iter()
                .zip(ds.row(c))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    let count = coreset.iter().filter(|&&c| ds.label(c) == ds.label(i)).count() as f64;
    [h, dist, 1.0 / (count + smoothing), 1.0 - (sorted[0] - sorted[1])]
}

#[test]
fn cached_table_matches_brute_force_each_round() {
    let ds = GaussianMixture {
        classes: 4,
        n: 160,
        dim: 3,
        ..GaussianMixture::default()
    }
    .generate()
    .unwrap();
    let all: Vec<usize> = (0..ds.len()).collect();
    let (emb, _) = Embeddings::build(&ds, &all, EmbeddingSpace::Raw).unwrap();
    let model = ProbeModel::init(3, 4, 5).unwrap();
    let smoothing = 1.0;
    let mut table = ScoreTable::new(ds.len(), 4, smoothing, true);

    let mut coreset: Vec<usize> = Vec::new();
    let mut pool = all.clone();
    for batch_size in [0, 7, 3, 12, 1] {
        let batch: Vec<usize> = pool.iter().step_by(5).take(batch_size).copied().collect();
        pool.retain(|i| !batch.contains(i));
        coreset.extend(&batch);
        table.commit_batch(&ds, &emb, &batch, &coreset, &pool);
        table.prepare(&model, &ds, &pool);

        let raw: Vec<[f64; 4]> = pool.iter().map(|&i| oracle_raw(&ds, &model, &coreset, i, smoothing)).collect();
        for (r, &i) in pool.iter().enumerate() {
            for j in [0, 2, 3] {
                assert!((table.raw(i)[j] - raw[r][j]).abs() < 1e-12, "sample {i} column {j}");
            }
            if coreset.is_empty() {
                assert!(table.raw(i)[1].is_infinite());
            } else {
                assert!((table.raw(i)[1] - raw[r][1]).abs() < 1e-12);
            }
        }
        for j in 0..4 {
            let col: Vec<f64> = raw.iter().map(|r| r[j]).collect();
            let want = if col.iter().all(|v| v.is_infinite()) {
                vec![1.0; col.len()]
            } else {
                oracle_minmax(&col)
            };
            for (r, &i) in pool.iter().enumerate() {
                assert!((table.normalized(i)[j] - want[r]).abs() < 1e-12, "normalized {i} column {j}");
            }
        }
    }
    // one model miss, then hits for the unchanged model
    assert_eq!(table.stats().model_misses, 1);
    assert_eq!(table.stats().model_hits, 4);
}

#[test]
fn stale_diversity_version_is_rejected() {
    let ds = GaussianMixture::default().generate().unwrap();
    let all: Vec<usize> = (0..ds.len()).collect();
    let (emb, _) = Embeddings::build(&ds, &all, EmbeddingSpace::Raw).unwrap();
    let mut table = ScoreTable::new(ds.len(), 3, 1.0, true);
    let v0 = table.coreset_version();
    table.commit_batch(&ds, &emb, &[0], &[0], &all[1..]);
    assert!(table.score_diversity(5, v0).is_err());
    assert!(table.score_diversity(5, table.coreset_version()).is_ok());
}

#[test]
fn score_function_examples() {
    assert_eq!(score_uncertainty(&[1.0, 0.0]).unwrap(), 0.0);
    assert!((score_uncertainty(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert!((score_boundary(&[0.7, 0.2, 0.1]).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(score_boundary(&[0.5, 0.5]).unwrap(), 1.0);
    assert_eq!(score_class_balance(1, &[3.0, 0.0], 1.0), 1.0);
    assert_eq!(score_class_balance(0, &[3.0, 0.0], 1.0), 0.25);
    assert_eq!(normalize_column(&[2.0, 2.0, 2.0]), vec![0.5; 3]);
    assert_eq!(normalize_column(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    let w = StrategyWeights::single(StrategyId::Diversity);
    assert_eq!(combined_score(&[0.1, 0.9, 0.3, 0.4], &w), 0.9);
}

fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn entropy_is_bounded_by_log_k(p in (2usize..8).prop_flat_map(distribution)) {
        let h = score_uncertainty(&p).unwrap();
        prop_assert!(h >= 0.0 && h <= (p.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn boundary_lies_in_unit_interval(p in (2usize..8).prop_flat_map(distribution)) {
        let b = score_boundary(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn normalization_matches_oracle(col in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let got = normalize_column(&col);
        let want = oracle_minmax(&col);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(g));
        }
    }

    #[test]
    fn normalization_is_affine_invariant(
        col in prop::collection::vec(-10f64..10.0, 2..20),
        scale in 0.5f64..4.0,
        shift in -5f64..5.0,
    ) {
        let moved: Vec<f64> = col.iter().map(|v| scale * v + shift).collect();
        for (a, b) in normalize_column(&col).iter().zip(normalize_column(&moved)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn combined_score_is_a_convex_combination(
        s in prop::array::uniform4(0f64..1.0),
        w in prop::array::uniform4(0.01f64..1.0),
    ) {
        let w = StrategyWeights::normalized(w).unwrap();
        let c = combined_score(&s, &w);
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c >= lo - 1e-12 && c <= hi + 1e-12);
    }
}
