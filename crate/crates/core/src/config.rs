//! TOML run configuration. One file fully determines a run; relative paths
//! resolve against the config file's directory.
//!
//! ```toml
//! seed = 7
//!
//! [data]
//! path = "toy.csv"
//! label_column = "label"
//!
//! [split]
//! val_fraction = 0.2
//!
//! [run]
//! method = "mode"
//! budget = 0.3
//!
//! [output]
//! dir = "runs/toy-mode"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::dataset::{split_pool_val, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, purpose};
use crate::selection::{Budget, Method, ProbeConfig, RunConfig};
use crate::strategy::StrategyWeights;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    /// Held-out test set in the same format, evaluated once after selection.
    #[serde(default)]
    pub test_path: Option<PathBuf>,
    /// Per-column standardization, fit on the training file.
    #[serde(default)]
    pub standardize: bool,
}

fn default_label_column() -> String {
    "label".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub val_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { val_fraction: 0.2 }
    }
}

/// The `[run]` section: selection knobs outside the probe and controller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub method: Method,
    pub budget: Budget,
    pub init_fraction: f64,
    pub round_fraction: f64,
    pub strategy_eval_k: usize,
    pub strategy_eval_epochs: usize,
    pub smoothing: f64,
    pub projection_dim: Option<usize>,
    pub caching: bool,
    pub stream_epsilon: f64,
    /// Fixed weights for `mode-streaming`.
    pub stream_weights: Option<StrategyWeights>,
}

impl Default for RunSection {
    fn default() -> Self {
        let d = RunConfig::default();
        Self {
            method: Method::Mode,
            budget: d.budget,
            init_fraction: d.init_fraction,
            round_fraction: d.round_fraction,
            strategy_eval_k: d.strategy_eval_k,
            strategy_eval_epochs: d.strategy_eval_epochs,
            smoothing: d.smoothing,
            projection_dim: d.projection_dim,
            caching: d.caching,
            stream_epsilon: d.stream_epsilon,
            stream_weights: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub dump_scores: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Root seed; every random stream is derived from it.
    #[serde(default)]
    pub seed: u64,
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    pub output: OutputConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.run_config().validate()?;
        let f = cfg.split.val_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("split.val_fraction must lie in (0, 1), got {f}")));
        }
        Ok(cfg)
    }

    /// Reads `path` and resolves relative data and output paths against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.data.path = base.join(&cfg.data.path);
        cfg.data.test_path = cfg.data.test_path.map(|p| base.join(p));
        cfg.output.dir = base.join(&cfg.output.dir);
        Ok(cfg)
    }

    pub fn run_config(&self) -> RunConfig {
        let r = &self.run;
        RunConfig {
            budget: r.budget,
            init_fraction: r.init_fraction,
            round_fraction: r.round_fraction,
            probe: self.probe.clone(),
            controller: self.controller.clone(),
            strategy_eval_k: r.strategy_eval_k,
            strategy_eval_epochs: r.strategy_eval_epochs,
            smoothing: r.smoothing,
            projection_dim: r.projection_dim,
            seed: self.seed,
            caching: r.caching,
            dump_scores: self.output.dump_scores,
            stream_epsilon: r.stream_epsilon,
        }
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, purpose::SPLIT, 0)
    }

    fn read_dataset(&self, path: &Path) -> Result<Dataset> {
        match self.data.format {
            DataFormat::Csv => Dataset::load_csv(path, &self.data.label_column),
            DataFormat::Binary => Dataset::load_binary(path),
        }
    }

    /// Training dataset (standardized if requested) and its pool/val split.
    pub fn load_data(&self) -> Result<(Dataset, SplitSpec)> {
        let mut data = self.read_dataset(&self.data.path)?;
        if self.data.standardize {
            data = data.standardize();
        }
        let split = split_pool_val(&data, self.split.val_fraction, self.split_seed())?;
        Ok((data, split))
    }

    /// Test dataset with labels aligned to the training classes,
    /// standardized with the training statistics when the training data is.
    pub fn load_test(&self) -> Result<Option<Dataset>> {
        let Some(path) = &self.data.test_path else {
            return Ok(None);
        };
        let train = self.read_dataset(&self.data.path)?;
        let test = self.read_dataset(path)?.align_classes(train.class_names())?;
        if self.data.standardize {
            return Ok(Some(train.standardize_other(&test)?));
        }
        Ok(Some(test))
    }
}
