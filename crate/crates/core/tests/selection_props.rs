//! Selection invariants shared by every method, plus targeted checks on the
//! adaptive loop's building blocks.

use std::collections::BTreeSet;

use modesel::dataset::{split_pool_val, Dataset, SplitSpec};
use modesel::embedding::{EmbeddingSpace, Embeddings};
use modesel::probe::{ProbeModel, TrainConfig};
use modesel::scoring::ScoreTable;
use modesel::selection::{
    evaluate_strategy_gain, kcenter_greedy, round_schedule, run_method, run_streaming, select_topk, Budget, GainProbe,
    Method, ProbeConfig, RunConfig,
};
use modesel::strategy::{StrategyId, StrategyWeights};
use modesel::synth::GaussianMixture;
use proptest::prelude::*;

const METHODS: [Method; 5] = [
    Method::Mode,
    Method::ModeStreaming,
    Method::Random,
    Method::Uncertainty,
    Method::Kcenter,
];

fn small_problem(seed: u64) -> (Dataset, SplitSpec) {
    let ds = GaussianMixture {
        classes: 3,
        n: 150,
        dim: 3,
        separation: 2.5,
        imbalance: 2.0,
        seed,
    }
    .generate()
    .unwrap();
    let split = split_pool_val(&ds, 0.2, seed).unwrap();
    (ds, split)
}

fn quick(budget: Budget, seed: u64) -> RunConfig {
    RunConfig {
        budget,
        seed,
        strategy_eval_k: 10,
        probe: ProbeConfig {
            epochs: 5,
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_method_respects_the_budget(
        seed in 0u64..1000,
        budget in 1usize..60,
        m in 0usize..5,
    ) {
        let (ds, split) = small_problem(seed);
        let method = METHODS[m];
        let run = run_method(method, &quick(Budget::Count(budget), seed), &ds, &split).unwrap();
        prop_assert_eq!(run.selected.len(), budget);
        let unique: BTreeSet<usize> = run.selected.iter().copied().collect();
        prop_assert_eq!(unique.len(), budget);
        prop_assert!(run.selected.iter().all(|i| split.pool_indices.contains(i)));
        // rounds partition the selection in commit order, sizes never shrink
        let flat: Vec<usize> = run.rounds.iter().flat_map(|r| r.batch.clone()).collect();
        prop_assert_eq!(&flat, &run.selected);
        prop_assert!(run.rounds.windows(2).all(|w| w[0].coreset_size <= w[1].coreset_size));
        for r in &run.rounds {
            prop_assert!((r.weights.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_sums_to_the_remaining_budget(budget in 1usize..2000, init in 0usize..200, frac in 0.01f64..=1.0) {
        let sizes = round_schedule(budget, init, frac);
        prop_assert_eq!(sizes.iter().sum::<usize>(), budget.saturating_sub(init));
        prop_assert!(sizes.iter().all(|&s| s >= 1));
    }

    #[test]
    fn topk_matches_a_stable_sort(scores in prop::collection::vec(0u8..5, 0..40), k in 0usize..40) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let k = k.min(scores.len());
        let mut oracle: Vec<usize> = (0..scores.len()).collect();
        // stable sort keeps ascending position among equal scores
        oracle.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
        oracle.truncate(k);
        prop_assert_eq!(select_topk(&scores, k).unwrap(), oracle);
    }
}

#[test]
fn same_seed_same_run() {
    let (ds, split) = small_problem(11);
    for method in METHODS {
        let cfg = quick(Budget::Fraction(0.3), 5);
        let a = run_method(method, &cfg, &ds, &split).unwrap();
        let b = run_method(method, &cfg, &ds, &split).unwrap();
        assert_eq!(a.selected, b.selected, "{}", method.name());
        assert!(a.rounds.iter().zip(&b.rounds).all(|(x, y)| x.same_trajectory(y)));
        assert_eq!(a.final_val_accuracy, b.final_val_accuracy);
    }
}

#[test]
fn budget_equal_to_seed_set_is_stratified_only() {
    let (ds, split) = small_problem(2);
    let cfg = RunConfig {
        init_fraction: 1.0,
        ..quick(Budget::Count(12), 0)
    };
    let run = run_method(Method::Mode, &cfg, &ds, &split).unwrap();
    assert_eq!(run.rounds.len(), 1);
    assert_eq!(run.selected.len(), 12);
    for c in 0..3 {
        assert!(run.selected.iter().any(|&i| ds.label(i) == c));
    }
}

#[test]
fn zero_evaluation_epochs_give_zero_gain() {
    let (ds, split) = small_problem(3);
    let cfg = RunConfig {
        strategy_eval_epochs: 0,
        ..quick(Budget::Count(40), 0)
    };
    let run = run_method(Method::Mode, &cfg, &ds, &split).unwrap();
    assert!(run.rounds.iter().all(|r| r.gains == [0.0; 4]));
    // no gain, no reward, weights stay uniform
    assert!(run.rounds.iter().all(|r| r.weights.l2_distance(&StrategyWeights::UNIFORM) < 1e-15));
}

#[test]
fn oversized_budget_is_rejected() {
    let (ds, split) = small_problem(4);
    let too_many = split.pool_indices.len() + 1;
    assert!(run_method(Method::Random, &quick(Budget::Count(too_many), 0), &ds, &split).is_err());
}

#[test]
fn budget_resolution() {
    assert_eq!(Budget::Fraction(0.3).resolve(240).unwrap(), 72);
    assert_eq!(Budget::Count(5).resolve(10).unwrap(), 5);
    assert!(Budget::Count(11).resolve(10).is_err());
    assert!(Budget::Fraction(0.0).resolve(10).is_err());
}

#[test]
fn ties_break_toward_lower_ids() {
    assert_eq!(select_topk(&[0.5; 6], 3).unwrap(), vec![0, 1, 2]);
    assert_eq!(select_topk(&[0.1, 0.9, 0.9, 0.3], 2).unwrap(), vec![1, 2]);
    assert!(select_topk(&[0.1], 2).is_err());
}

#[test]
fn uniform_probe_scores_are_flat() {
    let (ds, split) = small_problem(5);
    let pool = split.pool_indices.clone();
    let mut table = ScoreTable::new(ds.len(), 3, 1.0, true);
    let model = ProbeModel::from_parts(3, 3, vec![0.0; 9], vec![0.0; 3], 1.0).unwrap();
    table.prepare(&model, &ds, &pool);
    for j in [StrategyId::Uncertainty, StrategyId::Boundary] {
        let col = table.normalized_column(j, &pool);
        assert!(col.iter().all(|&v| v == 0.5));
        // flat column: the top-k are the first k pool positions
        assert_eq!(select_topk(&col, 4).unwrap(), vec![0, 1, 2, 3]);
    }
}

fn min_pairwise(ds: &Dataset, idx: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d: f64 = ds.row(i).iter().zip(ds.row(j)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    best
}

#[test]
fn kcenter_spreads_out_more_than_random() {
    let mut wins = 0;
    for seed in 0..10 {
        let (ds, split) = small_problem(seed);
        let cfg = quick(Budget::Count(20), seed);
        let k = run_method(Method::Kcenter, &cfg, &ds, &split).unwrap();
        let r = run_method(Method::Random, &cfg, &ds, &split).unwrap();
        // compare only the picks after the shared stratified seed set
        let seed_len = k.rounds[0].batch.len();
        if min_pairwise(&ds, &k.selected[seed_len..]) >= min_pairwise(&ds, &r.selected[seed_len..]) {
            wins += 1;
        }
    }
    assert!(wins >= 9, "k-center spread wins {wins}/10");
}

#[test]
fn farthest_point_traversal_on_a_square() {
    let pts = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5];
    let emb = Embeddings::from_rows(pts, 2).unwrap();
    let min_dist = vec![f64::INFINITY; 5];
    let picks = kcenter_greedy(&emb, &min_dist, &[0, 1, 2, 3, 4], 3);
    // first pick is the lowest id, then the opposite corner
    assert_eq!(&picks[..2], &[0, 3]);
}

#[test]
fn streaming_with_budget_covering_the_pool_takes_everything() {
    let (ds, split) = small_problem(6);
    let n = split.pool_indices.len();
    let run = run_streaming(&quick(Budget::Count(n), 0), &StrategyWeights::UNIFORM, &ds, &split).unwrap();
    let got: BTreeSet<usize> = run.selected.iter().copied().collect();
    let want: BTreeSet<usize> = split.pool_indices.iter().copied().collect();
    assert_eq!(got, want);
}

#[test]
fn raw_space_for_low_dimensions() {
    let (ds, split) = small_problem(7);
    let run = run_method(Method::Random, &quick(Budget::Count(10), 0), &ds, &split).unwrap();
    assert_eq!(run.embedding_space, EmbeddingSpace::Raw);
}

/// With a class missing from the coreset, topping up with the class-balance
/// picks should help the probe more than topping up with uncertain samples.
#[test]
fn class_balance_gain_beats_uncertainty_when_a_class_is_missing() {
    let mut c_wins = 0;
    for seed in 0..20 {
        let ds = GaussianMixture {
            classes: 3,
            n: 300,
            dim: 2,
            separation: 4.0,
            imbalance: 1.0,
            seed,
        }
        .generate()
        .unwrap();
        let split = split_pool_val(&ds, 0.2, seed).unwrap();
        let coreset: Vec<usize> = split.pool_indices.iter().copied().filter(|&i| ds.label(i) != 2).take(20).collect();
        let pool: Vec<usize> = split.pool_indices.iter().copied().filter(|i| !coreset.contains(i)).collect();
        let all: Vec<usize> = (0..ds.len()).collect();
        let (emb, _) = Embeddings::build(&ds, &all, EmbeddingSpace::Raw).unwrap();

        let cfg = RunConfig {
            probe: ProbeConfig {
                lr: 0.1,
                ..ProbeConfig::default()
            },
            ..RunConfig::default()
        };
        let mut model = ProbeModel::init(2, 3, seed).unwrap();
        let train = TrainConfig {
            epochs: 20,
            lr: 0.1,
            batch: 32,
        };
        model.train(&ds, &coreset, &split.val_indices, &train, seed).unwrap();
        let mut table = ScoreTable::new(ds.len(), 3, 1.0, true);
        table.commit_batch(&ds, &emb, &coreset, &coreset, &pool);
        table.prepare(&model, &ds, &pool);

        let probe = GainProbe {
            data: &ds,
            table: &table,
            coreset: &coreset,
            pool: &pool,
            model: &model,
            val: &split.val_indices,
            base_accuracy: model.accuracy(&ds, &split.val_indices).unwrap(),
            seed,
        };
        let c = evaluate_strategy_gain(StrategyId::ClassBalance, &cfg, &probe).unwrap();
        let u = evaluate_strategy_gain(StrategyId::Uncertainty, &cfg, &probe).unwrap();
        if c > u {
            c_wins += 1;
        }
    }
    assert!(c_wins > 10, "class balance won {c_wins}/20");
}
