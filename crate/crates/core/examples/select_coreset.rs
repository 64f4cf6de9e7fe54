//! Adaptive selection, printing per-round gains and weights. Without a CSV
//! path it uses an overlapping 5-class mixture.
//!
//! cargo run --release --example select_coreset -- [budget] [data.csv]

use modesel::dataset::{split_pool_val, Dataset};
use modesel::selection::{run_mode, Budget, ProbeConfig, RunConfig};
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let mut args = std::env::args().skip(1);
    let budget: f64 = args.next().map_or(0.3, |s| s.parse().expect("budget fraction"));
    let data = match args.next() {
        Some(path) => Dataset::load_csv(&path, "label")?,
        None => GaussianMixture {
            classes: 5,
            n: 1000,
            dim: 8,
            separation: 2.0,
            imbalance: 2.0,
            seed: 7,
        }
        .generate()?,
    };
    let split = split_pool_val(&data, 0.2, 7)?;
    let cfg = RunConfig {
        budget: Budget::Fraction(budget),
        probe: ProbeConfig {
            lr: 0.1,
            ..ProbeConfig::default()
        },
        ..RunConfig::default()
    };
    let run = run_mode(&cfg, &data, &split)?;

    println!("round  size  gain_u  gain_d  gain_c  gain_b    w_u     w_d     w_c     w_b    temp  val_acc");
    for r in &run.rounds {
        let (g, w) = (r.gains, r.weights.as_array());
        println!(
            "{:>5} {:>5}  {:+.3}  {:+.3}  {:+.3}  {:+.3}  {:.5} {:.5} {:.5} {:.5}  {:.3}  {:.4}",
            r.round, r.coreset_size, g[0], g[1], g[2], g[3], w[0], w[1], w[2], w[3], r.temperature, r.val_accuracy
        );
    }
    println!(
        "selected {} of {} pool samples; final val accuracy {:.4}",
        run.selected.len(),
        split.pool_indices.len(),
        run.final_val_accuracy
    );
    Ok(())
}
