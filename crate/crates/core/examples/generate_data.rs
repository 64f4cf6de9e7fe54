//! Write a synthetic Gaussian mixture in both on-disk formats and read it
//! back.
//!
//! cargo run --example generate_data -- [out_dir]

use std::path::PathBuf;

use modesel::dataset::Dataset;
use modesel::synth::GaussianMixture;

fn main() -> modesel::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let mixture = GaussianMixture {
        classes: 2,
        n: 1000,
        dim: 4,
        separation: 2.0,
        imbalance: 9.0,
        seed: 100,
    };
    let data = mixture.generate()?;
    let csv = dir.join("mixture.csv");
    let bin = dir.join("mixture.bin");
    data.write_csv(&csv)?;
    data.save_binary(&bin)?;

    let from_csv = Dataset::load_csv(&csv, "label")?;
    let from_bin = Dataset::load_binary(&bin)?;
    println!("class sizes {:?}", data.class_sizes());
    println!("csv    {} rows, sha256 {}", from_csv.len(), from_csv.content_hash());
    println!("binary {} rows, sha256 {} (f32 storage)", from_bin.len(), from_bin.content_hash());
    println!("standardized column means ~0: {:?}", column_means(&data.standardize()));
    Ok(())
}

fn column_means(d: &Dataset) -> Vec<String> {
    (0..d.dim())
        .map(|j| (0..d.len()).map(|i| d.row(i)[j]).sum::<f64>() / d.len() as f64)
        .map(|m| format!("{m:.1e}"))
        .collect()
}
