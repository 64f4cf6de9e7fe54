//! Subcommand bodies behind the `modesel` binary. Each returns a process
//! exit code; see [`exit`] for the contract.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{Config, DataFormat};
use crate::error::Error;
use crate::output::{self, DatasetInfo, Manifest};
use crate::report;
use crate::selection::{run_method, run_streaming, Method};
use crate::strategy::StrategyWeights;
use crate::synth::GaussianMixture;
use crate::verify::{run_suite, write_curve_csv, SuiteOptions};

pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const OUTPUT_EXISTS: i32 = 4;
    pub const VIOLATION: i32 = 5;
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::NotEnoughSamples { .. } => exit::USAGE,
        e if e.is_data_error() => exit::DATA,
        _ => exit::RUNTIME,
    }
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    code_for(&e)
}

fn occupied(dir: &Path) -> bool {
    fs::read_dir(dir).is_ok_and(|mut it| it.next().is_some())
}

/// Runs the configured selection method and writes its artifacts.
pub fn cmd_run(config_path: &Path, force: bool) -> i32 {
    let cfg = match Config::load(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let dir = &cfg.output.dir;
    if occupied(dir) && !force {
        eprintln!("error: output directory {} is not empty (use --force to overwrite)", dir.display());
        return exit::OUTPUT_EXISTS;
    }
    match execute(&cfg) {
        Ok(()) => exit::OK,
        Err(e) => fail(e),
    }
}

fn execute(cfg: &Config) -> crate::Result<()> {
    let (data, split) = cfg.load_data()?;
    let test = cfg.load_test()?;
    let run_cfg = cfg.run_config();
    let mut run = match cfg.run.method {
        Method::ModeStreaming => {
            let w = cfg.run.stream_weights.unwrap_or(StrategyWeights::UNIFORM);
            run_streaming(&run_cfg, &w, &data, &split)?
        }
        m => run_method(m, &run_cfg, &data, &split)?,
    };
    if let Some(test) = &test {
        run.evaluate_test(test)?;
    }

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        method: run.method.name().into(),
        seed: cfg.seed,
        budget: run.budget,
        rounds: run.rounds.len(),
        embedding_space: run.embedding_space.to_string(),
        dataset: DatasetInfo {
            path: cfg.data.path.display().to_string(),
            sha256: data.content_hash(),
            samples: data.len(),
            dim: data.dim(),
            classes: data.class_count(),
            standardized: data.is_standardized(),
        },
        final_val_accuracy: run.final_val_accuracy,
        final_val_recall: run.final_val_recall.clone(),
        final_test_accuracy: run.final_test_accuracy,
        config: serde_json::to_value(cfg)?,
    };
    output::write_run(dir, &run, &manifest)?;
    let test_note = run
        .final_test_accuracy
        .map_or(String::new(), |a| format!(", test accuracy {:.4}", a));
    println!(
        "{}: selected {} of {} pool samples in {} rounds, val accuracy {:.4}{} -> {}",
        run.method.name(),
        run.selected.len(),
        split.pool_indices.len(),
        run.rounds.len(),
        run.final_val_accuracy,
        test_note,
        dir.display()
    );
    Ok(())
}

/// Runs the theory suite; exit 5 on any failed check.
pub fn cmd_verify(opts: &SuiteOptions, curve_out: Option<&Path>) -> i32 {
    let report = match run_suite(opts) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if !report.curve.is_empty() {
        println!("budget  instances  mean_ratio  min_ratio");
        for r in &report.curve {
            println!("{:>6}  {:>9}  {:>10.4}  {:>9.4}", r.budget, r.instances, r.mean_ratio, r.min_ratio);
        }
    }
    if let Some(path) = curve_out {
        let written = fs::File::create(path)
            .map_err(|e| Error::io(path, e))
            .and_then(|f| write_curve_csv(&report.curve, f));
        if let Err(e) = written {
            return fail(e);
        }
    }
    if report.passed() {
        exit::OK
    } else {
        exit::VIOLATION
    }
}

/// Aggregates finished runs into markdown on stdout, plus `report.md` and
/// `report.csv` in `out` when given.
pub fn cmd_report(dirs: &[PathBuf], out: Option<&Path>) -> i32 {
    if dirs.is_empty() {
        eprintln!("error: report needs at least one run directory");
        return exit::USAGE;
    }
    let mut manifests = Vec::with_capacity(dirs.len());
    for d in dirs {
        match Manifest::load(d) {
            Ok(m) => manifests.push(m),
            Err(e) => {
                eprintln!("error: {}: {e}", d.display());
                return exit::DATA;
            }
        }
    }
    let rows = report::summarize(&manifests);
    let md = report::render_markdown(&rows);
    print!("{md}");
    if let Some(out) = out {
        let written = fs::create_dir_all(out)
            .map_err(|e| Error::io(out, e))
            .and_then(|_| fs::write(out.join("report.md"), &md).map_err(|e| Error::io(out.join("report.md"), e)))
            .and_then(|_| output::write_rows(&out.join("report.csv"), &rows));
        if let Err(e) = written {
            return fail(e);
        }
    }
    exit::OK
}

/// Writes a synthetic Gaussian mixture to `out`.
pub fn cmd_gen_data(mixture: &GaussianMixture, out: &Path, format: DataFormat, force: bool) -> i32 {
    if out.exists() && !force {
        eprintln!("error: {} exists (use --force to overwrite)", out.display());
        return exit::OUTPUT_EXISTS;
    }
    let data = match mixture.generate() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    let written = match format {
        DataFormat::Csv => data.write_csv(out),
        DataFormat::Binary => data.save_binary(out),
    };
    match written {
        Ok(()) => {
            println!(
                "wrote {} samples, {} features, class sizes {:?} -> {}",
                data.len(),
                data.dim(),
                data.class_sizes(),
                out.display()
            );
            exit::OK
        }
        Err(e) => fail(e),
    }
}
