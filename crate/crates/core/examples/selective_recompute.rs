//! Incremental score maintenance against full recomputation: same scores,
//! far fewer distance evaluations.
//!
//! cargo run --release --example selective_recompute -- [n]

use std::time::Instant;

use modesel::dataset::split_pool_val;
use modesel::selection::{run_mode, Budget, ProbeConfig, RunConfig};
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(2000, |s| s.parse().expect("sample count"));
    let data = GaussianMixture {
        classes: 5,
        n,
        dim: 8,
        separation: 2.5,
        imbalance: 1.0,
        seed: 3,
    }
    .generate()?;
    let split = split_pool_val(&data, 0.2, 3)?;
    let base = RunConfig {
        budget: Budget::Fraction(0.3),
        dump_scores: true,
        probe: ProbeConfig {
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    };

    let mut runs = Vec::new();
    for caching in [true, false] {
        let cfg = RunConfig { caching, ..base.clone() };
        let start = Instant::now();
        let run = run_mode(&cfg, &data, &split)?;
        println!(
            "caching {caching:<5}  distance evals {:>10}  probe rescoring passes {:>3}  {:.2}s",
            run.total_distance_evals(),
            run.rounds.iter().map(|r| r.model_cache_misses).sum::<u64>(),
            start.elapsed().as_secs_f64()
        );
        runs.push(run);
    }
    let same_scores = runs[0]
        .rounds
        .iter()
        .zip(&runs[1].rounds)
        .all(|(a, b)| a.scores == b.scores && a.same_trajectory(b));
    println!("identical scores and selections: {same_scores}");
    Ok(())
}
