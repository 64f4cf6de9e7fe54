//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test --release --test acceptance` for realistic timings.

use std::time::{Duration, Instant};

use rand::Rng as _;

use modesel::controller::{convergence_stats, round_update, softmax_weights, blend_weights, reward, temperature, ControllerConfig, ControllerState};
use modesel::dataset::{split_pool_val, Dataset};
use modesel::probe::ProbeModel;
use modesel::rng::rng_from_seed;
use modesel::selection::{
    baseline_random, baseline_uncertainty, run_mode, sieve_stream, Budget, ProbeConfig, RunConfig, SetFunctionObjective,
};
use modesel::strategy::{StrategyId, StrategyWeights};
use modesel::synth::GaussianMixture;
use modesel::verify::{
    brute_force_optimum, check_diminishing_returns, check_weighted_combination, greedy_maximize, FacilityLocation,
    SquaredCardinality, GREEDY_BOUND,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn greedy_approximation() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut total = 0.0;
    let instances = 200;
    for t in 0..instances {
        let n = 10 + t % 5;
        let budget = 2 + (t / 5) % 3;
        let f = FacilityLocation::random(n, 2, 1_000 + t as u64);
        let g = greedy_maximize(&f, budget).unwrap();
        let (_, opt) = brute_force_optimum(&f, budget).unwrap();
        let ratio = g.value / opt;
        worst = worst.min(ratio);
        total += ratio;
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= GREEDY_BOUND && within(elapsed, 30),
        format!(
            "min ratio {worst:.4} (bound {GREEDY_BOUND:.4}), mean {:.4} over {instances} instances, {:.2}s",
            total / instances as f64,
            elapsed.as_secs_f64()
        ),
    )
}

fn submodularity_suite() -> Outcome {
    let start = Instant::now();
    let trials = 10_000;
    let fl = FacilityLocation::random(14, 2, 11);
    let fl2 = FacilityLocation::random(14, 3, 12);
    let fl3 = FacilityLocation::random(14, 4, 13);
    let single = check_diminishing_returns(&fl, trials, 1).unwrap();
    let weighted = check_weighted_combination(&[&fl, &fl2, &fl3], &[0.2, 0.5, 1.3], trials, 2).unwrap();
    let control = check_diminishing_returns(&SquaredCardinality { n: 14 }, trials, 3).unwrap();
    let elapsed = start.elapsed();
    outcome(
        single.violations == 0
            && weighted.combined.violations == 0
            && weighted.components_submodular()
            && control.violations > 0
            && within(elapsed, 10),
        format!(
            "facility location {} / {trials} violations, weighted sum {} / {trials}, supermodular control {} / {trials}, {:.2}s",
            single.violations,
            weighted.combined.violations,
            control.violations,
            elapsed.as_secs_f64()
        ),
    )
}

fn cache_equivalence() -> Outcome {
    let start = Instant::now();
    let data = GaussianMixture {
        classes: 5,
        n: 1000,
        dim: 8,
        separation: 2.5,
        imbalance: 1.0,
        seed: 3,
    }
    .generate()
    .unwrap();
    let split = split_pool_val(&data, 0.2, 3).unwrap();
    let cfg = RunConfig {
        budget: Budget::Count(300),
        seed: 3,
        dump_scores: true,
        probe: ProbeConfig {
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    };
    let cached = run_mode(&RunConfig { caching: true, ..cfg.clone() }, &data, &split).unwrap();
    let naive = run_mode(&RunConfig { caching: false, ..cfg }, &data, &split).unwrap();

    let same_selection = cached.selected == naive.selected;
    let same_logs = cached.rounds.len() == naive.rounds.len()
        && cached.rounds.iter().zip(&naive.rounds).all(|(a, b)| a.same_trajectory(b));
    let mut max_score_gap = 0.0f64;
    for (a, b) in cached.rounds.iter().zip(&naive.rounds) {
        if let (Some(sa), Some(sb)) = (&a.scores, &b.scores) {
            if sa.len() != sb.len() {
                max_score_gap = f64::INFINITY;
                continue;
            }
            for (x, y) in sa.iter().zip(sb) {
                max_score_gap = max_score_gap.max((x.combined - y.combined).abs());
                for j in 0..4 {
                    max_score_gap = max_score_gap.max((x.normalized[j] - y.normalized[j]).abs());
                    let (rx, ry) = (x.raw[j], y.raw[j]);
                    if rx != ry {
                        max_score_gap = max_score_gap.max((rx - ry).abs());
                    }
                }
            }
        }
    }
    let (ce, ne) = (cached.total_distance_evals(), naive.total_distance_evals());
    let elapsed = start.elapsed();
    outcome(
        same_selection && same_logs && max_score_gap <= 1e-12 && ce < ne && within(elapsed, 120),
        format!(
            "identical selection: {same_selection}, identical round logs: {same_logs}, max score gap {max_score_gap:.1e}, \
             distance evaluations {ce} cached vs {ne} naive ({} rounds), {:.1}s",
            cached.rounds.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn controller_algebra() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let w = softmax_weights(&[1.0; 4], 1.0);
    check("symmetric softmax", w.as_array().iter().all(|&x| (x - 0.25).abs() <= 1e-12));
    check("symmetric softmax matches initial weights", w.l2_distance(&StrategyWeights::UNIFORM) <= 1e-12);
    check("reward zero on no gain", reward(0.0, 0.4) == 0.0 && reward(-0.01, 0.4) == 0.0);
    check("reward scales positive gain", (reward(0.02, 0.25) - 0.005).abs() <= 1e-12);
    let target = StrategyWeights::new([0.5, 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0]).unwrap();
    let old = StrategyWeights::UNIFORM;
    check("blend delta 0", blend_weights(&old, &target, 0.0).unwrap().l2_distance(&old) <= 1e-12);
    check("blend delta 1", blend_weights(&old, &target, 1.0).unwrap().l2_distance(&target) <= 1e-12);
    let b = blend_weights(&old, &target, 0.2).unwrap();
    check(
        "blend delta 0.2",
        (b[0] - 0.30).abs() <= 1e-12 && (1..4).all(|j| (b[j] - 0.7 / 3.0).abs() <= 1e-12),
    );
    let cfg = ControllerConfig::default();
    check("temperature at start", (temperature(&cfg, 1.0, 0.0) - 1.0).abs() <= 1e-12);
    check("temperature e^-1", (temperature(&cfg, 0.0, 0.0) - (-1f64).exp()).abs() <= 1e-12);
    check(
        "temperature floor",
        temperature(&ControllerConfig { tau_min: 0.5, ..cfg.clone() }, 0.0, 1.0) == 0.5,
    );
    let next = round_update(&ControllerState::new(&cfg), &cfg, &[0.02, 0.0, 0.0, 0.0], None);
    let w = next.weights;
    check(
        "single positive gain shifts weight",
        w[0] > 0.25 && (1..4).all(|j| w[j] < 0.25) && (w.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-12,
    );
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "11 algebra checks exact to 1e-12".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

/// Runs the controller over `rounds` steps with fixed gains and a frozen
/// training state, so the temperature stays at `tau0`.
fn trajectory(cfg: &ControllerConfig, gains: [f64; 4], rounds: usize) -> Vec<StrategyWeights> {
    let mut state = ControllerState::new(cfg);
    let mut history = vec![state.weights];
    for _ in 0..rounds {
        state.observe(0.0, 0.5, 1.0, 1.0);
        state = round_update(&state, cfg, &gains, None);
        history.push(state.weights);
    }
    history
}

fn weight_convergence() -> Outcome {
    let cfg = ControllerConfig::default();
    let mut rng = rng_from_seed(55);
    let mut worst_rate = 0.0f64;
    let mut worst_total = 0.0f64;
    for _ in 0..10 {
        let gains: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..0.05));
        let stats = convergence_stats(&trajectory(&cfg, gains, 200)).unwrap();
        worst_rate = worst_rate.max(stats.geometric_rate(1e-15).unwrap_or(0.0));
        worst_total = worst_total.max(stats.cumulative);
    }
    let rate_bound = (1.0 - cfg.blend) + 0.01;

    // at the end of the schedule (budget spent, epochs done) these decays
    // put the raw temperature at exp(-3) < 0.05, so it sits on the floor
    let sched = ControllerConfig {
        alpha_decay: 1.5,
        beta_decay: 1.5,
        ..cfg.clone()
    };
    let floor_hit = temperature(&sched, 0.0, 1.0) == sched.tau_min;
    let rounds = 100;
    let mut settled = 0;
    let mut settle_rounds = Vec::new();
    let mut first_steps = Vec::new();
    for seed in 0..10 {
        let mut rng = rng_from_seed(900 + seed);
        let gains: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..0.1));
        let mut state = ControllerState::new(&sched);
        let mut history = vec![state.weights];
        for _ in 0..rounds {
            state.observe(1.0, 0.5, 1.0, 0.0);
            state = round_update(&state, &sched, &gains, None);
            history.push(state.weights);
        }
        let stats = convergence_stats(&history).unwrap();
        first_steps.push(stats.per_step[0]);
        let at = stats.settled_after(1e-3);
        if at.is_some_and(|t| t <= rounds * 3 / 10) {
            settled += 1;
        }
        settle_rounds.push(at.map_or("never".to_string(), |t| t.to_string()));
    }
    let min_first = first_steps.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        worst_rate <= rate_bound && worst_total.is_finite() && worst_total < 10.0 && settled >= 8 && floor_hit,
        format!(
            "stationary: worst rate {worst_rate:.4} (bound {rate_bound:.2}), worst cumulative {worst_total:.4}; \
             clamped at tau_min: {settled}/10 settle within 30% of {rounds} rounds \
             (settle round per seed: {}; smallest first step {min_first:.2e})",
            settle_rounds.join(" ")
        ),
    )
}

fn efficacy_config(seed: u64) -> RunConfig {
    RunConfig {
        budget: Budget::Fraction(0.3),
        seed,
        probe: ProbeConfig {
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    }
}

fn end_to_end_efficacy() -> Outcome {
    let start = Instant::now();
    let (mut mode, mut random, mut unc) = (0.0, 0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let data = GaussianMixture {
            classes: 10,
            n: 2000,
            dim: 16,
            separation: 2.5,
            imbalance: 1.0,
            seed,
        }
        .generate()
        .unwrap();
        let split = split_pool_val(&data, 0.2, seed).unwrap();
        let cfg = efficacy_config(seed);
        mode += run_mode(&cfg, &data, &split).unwrap().final_val_accuracy;
        random += baseline_random(&cfg, &data, &split).unwrap().final_val_accuracy;
        unc += baseline_uncertainty(&cfg, &data, &split).unwrap().final_val_accuracy;
    }
    let k = 100.0 / seeds as f64;
    let (mode, random, unc) = (mode * k, random * k, unc * k);
    let elapsed = start.elapsed();
    outcome(
        mode >= random + 2.0 && mode >= unc - 0.5 && within(elapsed, 300),
        format!(
            "mean val accuracy: mode {mode:.2}%, random {random:.2}% ({:+.2} pts), uncertainty {unc:.2}% ({:+.2} pts), {:.1}s",
            mode - random,
            mode - unc,
            elapsed.as_secs_f64()
        ),
    )
}

fn imbalance_behavior() -> Outcome {
    let seeds = 10;
    let mut early_balance = 0;
    let (mut mode_recall, mut random_recall) = (0.0, 0.0);
    for seed in 0..seeds {
        let data = GaussianMixture {
            classes: 2,
            n: 1000,
            dim: 4,
            separation: 2.0,
            imbalance: 9.0,
            seed: 100 + seed,
        }
        .generate()
        .unwrap();
        let split = split_pool_val(&data, 0.2, seed).unwrap();
        let cfg = RunConfig {
            budget: Budget::Fraction(0.2),
            seed,
            probe: ProbeConfig {
                lr: 0.1,
                ..ProbeConfig::default()
            },
            ..RunConfig::default()
        };
        let mode = run_mode(&cfg, &data, &split).unwrap();
        let c = StrategyId::ClassBalance;
        if mode.rounds[1..=2].iter().any(|r| r.weights.get(c) > 0.25) {
            early_balance += 1;
        }
        let random = baseline_random(&cfg, &data, &split).unwrap();
        mode_recall += mode.final_val_recall[1];
        random_recall += random.final_val_recall[1];
    }
    let k = 100.0 / seeds as f64;
    let (mode_recall, random_recall) = (mode_recall * k, random_recall * k);
    outcome(
        early_balance >= 7 && mode_recall >= random_recall + 5.0,
        format!(
            "class-balance weight above 0.25 in round 1 or 2 in {early_balance}/10 seeds; \
             minority recall mode {mode_recall:.2}% vs random {random_recall:.2}% ({:+.2} pts)",
            mode_recall - random_recall
        ),
    )
}

fn streaming_bound() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut strong = 0;
    let eps = 0.05;
    for t in 0..50 {
        let f = FacilityLocation::random(60, 2, 7_000 + t);
        let order: Vec<usize> = (0..60).collect();
        let s = sieve_stream(&SetFunctionObjective(&f), &order, 8, eps);
        let g = greedy_maximize(&f, 8).unwrap();
        let ratio = s.value / g.value;
        worst = worst.min(ratio);
        if ratio >= GREEDY_BOUND - eps {
            strong += 1;
        }
    }
    outcome(
        worst >= 0.45,
        format!(
            "min stream/greedy ratio {worst:.4} over 50 instances (floor 0.45); \
             the stronger (1-1/e-eps) claim is unverified ({strong}/50 instances happen to reach {:.4} of greedy)",
            GREEDY_BOUND - eps
        ),
    )
}

fn gradient_correctness() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let mut rng = rng_from_seed(31_000 + t);
        let dim = rng.random_range(1..5);
        let classes = rng.random_range(2..5);
        let n = rng.random_range(classes..12);
        let features: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
        labels.rotate_left(rng.random_range(0..n));
        let data = Dataset::new(features, dim, labels, classes).unwrap();
        let weights: Vec<f64> = (0..dim * classes).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias: Vec<f64> = (0..classes).map(|_| rng.random_range(-1.0..1.0)).collect();
        let temp = rng.random_range(0.5..2.0);
        let model = ProbeModel::from_parts(dim, classes, weights, bias, temp).unwrap();
        let idx: Vec<usize> = (0..n).collect();
        let grad = model.gradient(&data, &idx).unwrap();
        let analytic: Vec<f64> = grad.weights.iter().chain(&grad.bias).copied().collect();

        let h = 1e-5;
        for (k, &a) in analytic.iter().enumerate() {
            let loss_at = |delta: f64| {
                let mut m = model.clone();
                let (w, b) = m.params_mut();
                if k < w.len() {
                    w[k] += delta;
                } else {
                    b[k - w.len()] += delta;
                }
                m.loss(&data, &idx).unwrap()
            };
            let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            worst = worst.max(rel);
        }
    }
    outcome(worst <= 1e-4, format!("worst relative error {worst:.2e} over 100 instances"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("greedy approximation ratio", greedy_approximation),
        ("submodularity suite", submodularity_suite),
        ("cache equivalence", cache_equivalence),
        ("controller algebra", controller_algebra),
        ("weight convergence", weight_convergence),
        ("end-to-end efficacy", end_to_end_efficacy),
        ("imbalance behavior", imbalance_behavior),
        ("streaming bound", streaming_bound),
        ("gradient correctness", gradient_correctness),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!("{} {}. {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
