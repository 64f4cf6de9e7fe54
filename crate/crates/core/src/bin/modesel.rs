use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use modesel::cli::{self, exit};
use modesel::config::DataFormat;
use modesel::synth::GaussianMixture;
use modesel::verify::SuiteOptions;

/// Adaptive multi-objective coreset selection.
#[derive(Parser)]
#[command(name = "modesel", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a selection method described by a TOML config.
    Run {
        config: PathBuf,
        /// Overwrite a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Check submodularity, monotonicity and greedy approximation ratios.
    Verify {
        /// Ground-set size of the random instances (capped at 14).
        #[arg(long, default_value_t = 12)]
        size: usize,
        /// Random diminishing-returns chains per function.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Random instances for the greedy-vs-optimum check.
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Treat a supermodular function as submodular; the suite must fail.
        #[arg(long)]
        inject_supermodular: bool,
        /// Write the approximation curve as CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Summarize finished runs (mean ± std per method).
    Report {
        dirs: Vec<PathBuf>,
        /// Also write report.md and report.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic Gaussian-mixture dataset.
    GenData {
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Norm of each class mean.
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        /// Largest over smallest class size.
        #[arg(long, default_value_t = 1.0)]
        imbalance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MODESEL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MODESEL_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(exit::USAGE as u8);
    }
    let code = match args.command {
        Command::Run { config, force } => cli::cmd_run(&config, force),
        Command::Verify {
            size,
            trials,
            instances,
            seed,
            inject_supermodular,
            curve,
        } => cli::cmd_verify(
            &SuiteOptions {
                size,
                trials,
                instances,
                seed,
                inject_supermodular,
            },
            curve.as_deref(),
        ),
        Command::Report { dirs, out } => cli::cmd_report(&dirs, out.as_deref()),
        Command::GenData {
            classes,
            n,
            dim,
            separation,
            imbalance,
            seed,
            format,
            out,
            force,
        } => {
            let mixture = GaussianMixture {
                classes,
                n,
                dim,
                separation,
                imbalance,
                seed,
            };
            let format = match format {
                Format::Csv => DataFormat::Csv,
                Format::Binary => DataFormat::Binary,
            };
            cli::cmd_gen_data(&mixture, &out, format, force)
        }
    };
    ExitCode::from(code as u8)
}
