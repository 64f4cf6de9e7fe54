//! Train the logistic-regression probe, inspect calibration at several
//! temperatures and round-trip a checkpoint.
//!
//! cargo run --example probe_model

use modesel::dataset::split_pool_val;
use modesel::probe::{ProbeModel, TrainConfig};
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let data = GaussianMixture {
        classes: 4,
        n: 800,
        dim: 6,
        separation: 3.0,
        imbalance: 2.0,
        seed: 2,
    }
    .generate()?;
    let split = split_pool_val(&data, 0.25, 2)?;
    let mut model = ProbeModel::init(data.dim(), data.class_count(), 0)?;
    let cfg = TrainConfig {
        epochs: 30,
        lr: 0.1,
        batch: 32,
    };
    let report = model.train(&data, &split.pool_indices, &split.val_indices, &cfg, 1)?;
    println!(
        "loss {:.4} -> {:.4}, val accuracy {:.4}, final gradient norm {:.2e}",
        report.epoch_losses[0],
        report.epoch_losses[cfg.epochs - 1],
        report.final_val_accuracy,
        report.grad_norm_last
    );
    println!("per-class recall {:?}", model.per_class_recall(&data, &split.val_indices)?);

    let x = data.row(split.val_indices[0]);
    for t in [0.5, 1.0, 2.0] {
        let p = model.clone().with_temperature(t)?.predict_proba(x)?;
        println!("T = {t}: {:?}", p.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    }

    let restored = ProbeModel::from_checkpoint(&model.to_checkpoint()?)?;
    println!(
        "checkpoint round trip: val accuracy {:.4}",
        restored.accuracy(&data, &split.val_indices)?
    );
    Ok(())
}
