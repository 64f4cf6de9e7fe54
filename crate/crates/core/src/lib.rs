//! Adaptive multi-objective coreset selection.
//!
//! A small linear probe is trained on a growing coreset. Each round, every
//! pool sample is scored by four strategies (uncertainty, diversity, class
//! balance, boundary proximity), a controller re-weights the strategies from
//! their measured validation gains, and the top combined scores join the
//! coreset. Scores are recomputed selectively: model-dependent scores only
//! when the probe changes, diversity only against newly added samples.
//!
//! The [`verify`] module holds brute-force checks of the set-function
//! properties the selection relies on, and the greedy approximation curve.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod controller;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod output;
pub mod probe;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod selection;
pub mod strategy;
pub mod synth;
pub mod verify;

pub use config::Config;
pub use controller::{ControllerConfig, ControllerState, WeightNet};
pub use dataset::{Dataset, SplitSpec};
pub use error::{Error, Result};
pub use probe::{ProbeModel, TrainConfig};
pub use scoring::ScoreTable;
pub use selection::{run_method, run_mode, Budget, Method, RunConfig, SelectionRun};
pub use strategy::{StrategyId, StrategyWeights};
