//! MODE against the random, uncertainty and k-center baselines on a
//! 10-class Gaussian mixture, averaged over seeds.
//!
//! cargo run --release --example compare_baselines -- [seeds] [separation] [epochs] [lr]

use std::time::Instant;

use modesel::dataset::split_pool_val;
use modesel::selection::{run_method, Budget, Method, ProbeConfig, RunConfig};
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(5, |s| s.parse().expect("seed count"));
    let separation: f64 = args.next().map_or(2.5, |s| s.parse().expect("separation"));
    let epochs: usize = args.next().map_or(20, |s| s.parse().expect("epochs"));
    let lr: f64 = args.next().map_or(0.1, |s| s.parse().expect("learning rate"));
    let methods = [Method::Mode, Method::Random, Method::Uncertainty, Method::Kcenter];
    let mut acc = vec![Vec::new(); methods.len()];
    let start = Instant::now();
    for seed in 0..seeds {
        let data = GaussianMixture {
            classes: 10,
            n: 2000,
            dim: 16,
            separation,
            imbalance: 1.0,
            seed,
        }
        .generate()?;
        let split = split_pool_val(&data, 0.2, seed)?;
        let cfg = RunConfig {
            budget: Budget::Fraction(0.3),
            seed,
            probe: ProbeConfig {
                epochs,
                lr,
                ..ProbeConfig::default()
            },
            ..RunConfig::default()
        };
        for (m, method) in methods.iter().enumerate() {
            let run = run_method(*method, &cfg, &data, &split)?;
            acc[m].push(100.0 * run.final_val_accuracy);
        }
        println!("seed {seed}: {:?}", acc.iter().map(|a| a[seed as usize]).collect::<Vec<_>>());
    }
    for (m, method) in methods.iter().enumerate() {
        let mean = acc[m].iter().sum::<f64>() / acc[m].len() as f64;
        println!("{:<12} {mean:6.2}", method.name());
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
