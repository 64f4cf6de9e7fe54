//! One-pass sieve selection against the batch adaptive loop.
//!
//! cargo run --release --example streaming_selection -- [epsilon]

use modesel::dataset::split_pool_val;
use modesel::selection::{run_mode, run_streaming, Budget, ProbeConfig, RunConfig};
use modesel::strategy::StrategyWeights;
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let epsilon: f64 = std::env::args().nth(1).map_or(0.05, |s| s.parse().expect("epsilon"));
    let data = GaussianMixture {
        classes: 5,
        n: 1500,
        dim: 8,
        separation: 2.5,
        imbalance: 3.0,
        seed: 1,
    }
    .generate()?;
    let split = split_pool_val(&data, 0.2, 1)?;
    let cfg = RunConfig {
        budget: Budget::Fraction(0.2),
        stream_epsilon: epsilon,
        probe: ProbeConfig {
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    };

    let weights = [
        ("uniform", StrategyWeights::UNIFORM),
        ("diversity-heavy", StrategyWeights::new([0.1, 0.7, 0.1, 0.1])?),
        ("balance-heavy", StrategyWeights::new([0.1, 0.1, 0.7, 0.1])?),
    ];
    for (name, w) in weights {
        let run = run_streaming(&cfg, &w, &data, &split)?;
        let classes = data.subset(&run.selected)?.class_sizes();
        println!(
            "stream {name:<16} val {:.4}  class sizes {classes:?}  distance evals {}",
            run.final_val_accuracy,
            run.total_distance_evals()
        );
    }
    let run = run_mode(&cfg, &data, &split)?;
    let classes = data.subset(&run.selected)?.class_sizes();
    println!(
        "adaptive {:<14} val {:.4}  class sizes {classes:?}  rounds {}",
        "",
        run.final_val_accuracy,
        run.rounds.len()
    );
    Ok(())
}
