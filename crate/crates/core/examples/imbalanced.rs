//! Selection on a 90/10 two-class mixture: how early the class-balance
//! weight rises and how MODE's minority recall compares to random picks.
//!
//! cargo run --release --example imbalanced -- [seeds] [separation] [budget fraction] [n] [eval k] [dim]

use modesel::dataset::split_pool_val;
use modesel::selection::{baseline_random, run_mode, Budget, ProbeConfig, RunConfig};
use modesel::strategy::StrategyId;
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(10, |s| s.parse().expect("seed count"));
    let separation: f64 = args.next().map_or(2.0, |s| s.parse().expect("separation"));
    let budget: f64 = args.next().map_or(0.2, |s| s.parse().expect("budget fraction"));
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("sample count"));
    let eval_k: usize = args.next().map_or(25, |s| s.parse().expect("strategy eval k"));
    let dim: usize = args.next().map_or(4, |s| s.parse().expect("dimension"));
    let (mut mode_recall, mut random_recall) = (0.0, 0.0);
    let mut early = 0;
    println!("seed  w_c(r1)  w_c(r2)  gains r1 [u d c b]            minority recall mode / random");
    for seed in 0..seeds {
        let data = GaussianMixture {
            classes: 2,
            n,
            dim,
            separation,
            imbalance: 9.0,
            seed: 100 + seed,
        }
        .generate()?;
        let split = split_pool_val(&data, 0.2, seed)?;
        let cfg = RunConfig {
            budget: Budget::Fraction(budget),
            seed,
            strategy_eval_k: eval_k,
            probe: ProbeConfig {
                lr: 0.1,
                ..ProbeConfig::default()
            },
            ..RunConfig::default()
        };
        let mode = run_mode(&cfg, &data, &split)?;
        let random = baseline_random(&cfg, &data, &split)?;
        let c = StrategyId::ClassBalance;
        let g = mode.rounds[1].gains;
        println!(
            "{seed:>4}  {:.6}  {:.6}  [{:+.3} {:+.3} {:+.3} {:+.3}]  {:.3} / {:.3}",
            mode.rounds[1].weights.get(c),
            mode.rounds[2].weights.get(c),
            g[0],
            g[1],
            g[2],
            g[3],
            mode.final_val_recall[1],
            random.final_val_recall[1]
        );
        if mode.rounds[1..=2].iter().any(|r| r.weights.get(c) > 0.25) {
            early += 1;
        }
        mode_recall += mode.final_val_recall[1];
        random_recall += random.final_val_recall[1];
    }
    let k = 100.0 / seeds as f64;
    println!("class-balance weight above 0.25 in round 1 or 2: {early}/{seeds} seeds");
    println!("mean minority recall: mode {:.2}%, random {:.2}%", mode_recall * k, random_recall * k);
    Ok(())
}
