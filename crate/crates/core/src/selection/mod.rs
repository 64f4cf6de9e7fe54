//! Budgeted coreset construction.
//!
//! [`run_mode`] drives the adaptive loop: a stratified seed coreset, then
//! rounds of scoring the pool, measuring each strategy's validation gain on
//! a throwaway fine-tune, updating the controller weights, and committing
//! the top combined scores before retraining the probe. Baselines share the
//! same round structure and retraining, swapping only the selection rule.

mod agreement;
mod streaming;

use std::time::Instant;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use agreement::{agreement_thresholds, percentile, AgreementThresholds, AGREEMENT_PERCENTILE};
pub use streaming::{sieve_stream, CoverageState, SetFunctionObjective, StreamObjective, StreamResult, WeightedCoverage};

use crate::controller::{round_update, ControllerConfig, ControllerState, WeightNet};
use crate::dataset::{stratified_sample, Dataset, SplitSpec};
use crate::embedding::{EmbeddingSpace, Embeddings, Projection};
use crate::error::{Error, Result};
use crate::probe::{ProbeModel, TrainConfig};
use crate::rng::{derive_rng, derive_seed, purpose};
use crate::scoring::{ScoreRow, ScoreTable};
use crate::strategy::{StrategyId, StrategyWeights, NUM_STRATEGIES};

/// Coreset budget: an absolute count or a fraction of the pool.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Count(usize),
    Fraction(f64),
}

impl Budget {
    pub fn resolve(self, pool_size: usize) -> Result<usize> {
        let b = match self {
            Budget::Count(b) => b,
            Budget::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::Config(format!("budget fraction must lie in (0, 1], got {f}")));
                }
                ((f * pool_size as f64).round() as usize).max(1)
            }
        };
        if b == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        if b > pool_size {
            return Err(Error::NotEnoughSamples {
                requested: b,
                available: pool_size,
            });
        }
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    /// Softmax temperature of the probe.
    pub temperature: f64,
    /// Continue from the previous round's parameters instead of reinitializing.
    pub warm_start: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            lr: 0.01,
            batch: 32,
            temperature: 1.0,
            warm_start: true,
        }
    }
}

impl ProbeConfig {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            batch: self.batch,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub budget: Budget,
    /// Seed coreset size as a fraction of the budget.
    pub init_fraction: f64,
    /// Per-round batch as a fraction of the remaining budget (at least 1).
    pub round_fraction: f64,
    pub probe: ProbeConfig,
    pub controller: ControllerConfig,
    /// Temporary samples added when measuring one strategy's gain.
    pub strategy_eval_k: usize,
    pub strategy_eval_epochs: usize,
    pub smoothing: f64,
    /// PCA dimension for diversity distances; `None` picks 32 when the raw
    /// dimension exceeds 32, raw features otherwise.
    pub projection_dim: Option<usize>,
    pub seed: u64,
    pub caching: bool,
    /// Keep per-round score rows in the round logs.
    pub dump_scores: bool,
    /// Threshold-grid resolution of the streaming variant.
    pub stream_epsilon: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            budget: Budget::Fraction(0.3),
            init_fraction: 0.1,
            round_fraction: 0.1,
            probe: ProbeConfig::default(),
            controller: ControllerConfig::default(),
            strategy_eval_k: 25,
            strategy_eval_epochs: 3,
            smoothing: 1.0,
            projection_dim: None,
            seed: 0,
            caching: true,
            dump_scores: false,
            stream_epsilon: 0.05,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("init_fraction", self.init_fraction), ("round_fraction", self.round_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        if self.probe.epochs == 0 || self.probe.batch == 0 {
            return Err(Error::Config("probe.epochs and probe.batch must be >= 1".into()));
        }
        if !(self.probe.lr >= 0.0) || !(self.probe.temperature > 0.0) {
            return Err(Error::Config("probe.lr must be >= 0 and probe.temperature > 0".into()));
        }
        if !(self.smoothing >= 0.0) {
            return Err(Error::Config("smoothing must be >= 0".into()));
        }
        if !(self.stream_epsilon > 0.0) {
            return Err(Error::Config("stream_epsilon must be > 0".into()));
        }
        self.controller.validate()
    }
}

/// Batch sizes of the adaptive rounds after the seed coreset.
pub fn round_schedule(budget: usize, init: usize, round_fraction: f64) -> Vec<usize> {
    let mut remaining = budget.saturating_sub(init);
    let mut sizes = Vec::new();
    while remaining > 0 {
        let n = ((round_fraction * remaining as f64).round() as usize).clamp(1, remaining);
        sizes.push(n);
        remaining -= n;
    }
    sizes
}

/// Positions of the `k` largest scores, best first; ties go to the lower
/// position.
pub fn select_topk(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(Error::NotEnoughSamples {
            requested: k,
            available: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

/// Farthest-point traversal from the current coreset. `min_dist` holds each
/// sample's distance to the coreset (infinite when empty).
pub fn kcenter_greedy(emb: &Embeddings, min_dist: &[f64], pool: &[usize], k: usize) -> Vec<usize> {
    let mut dist: Vec<f64> = pool.iter().map(|&i| min_dist[i]).collect();
    let mut taken = vec![false; pool.len()];
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k.min(pool.len()) {
        let mut best: Option<usize> = None;
        for p in 0..pool.len() {
            if !taken[p] && best.is_none_or(|b| dist[p] > dist[b]) {
                best = Some(p);
            }
        }
        let Some(b) = best else { break };
        taken[b] = true;
        picks.push(pool[b]);
        for p in 0..pool.len() {
            if !taken[p] {
                dist[p] = dist[p].min(emb.distance(pool[p], pool[b]));
            }
        }
    }
    picks
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mode,
    ModeStreaming,
    Random,
    Uncertainty,
    Kcenter,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mode => "mode",
            Method::ModeStreaming => "mode-streaming",
            Method::Random => "random",
            Method::Uncertainty => "uncertainty",
            Method::Kcenter => "kcenter",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mode" => Method::Mode,
            "mode-streaming" => Method::ModeStreaming,
            "random" => Method::Random,
            "uncertainty" => Method::Uncertainty,
            "kcenter" => Method::Kcenter,
            other => return Err(Error::Config(format!("unknown method `{other}`"))),
        })
    }
}

/// One pool sample's scores in a round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreDump {
    pub sample_id: usize,
    pub raw: ScoreRow,
    pub normalized: ScoreRow,
    pub combined: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    /// 0 is the stratified seed round.
    pub round: usize,
    /// Coreset size after this round's commit.
    pub coreset_size: usize,
    pub batch: Vec<usize>,
    pub weights: StrategyWeights,
    pub temperature: f64,
    pub gains: [f64; NUM_STRATEGIES],
    pub rewards: [f64; NUM_STRATEGIES],
    pub alpha: [f64; NUM_STRATEGIES],
    /// Validation accuracy before this round's commit.
    pub base_val_accuracy: f64,
    /// Validation accuracy after retraining on the grown coreset.
    pub val_accuracy: f64,
    pub grad_norm: f64,
    pub flagged: Option<[usize; NUM_STRATEGIES]>,
    pub agreement: Option<usize>,
    pub model_cache_hits: u64,
    pub model_cache_misses: u64,
    pub distance_evals: u64,
    pub wall_time_ms: f64,
    pub scores: Option<Vec<ScoreDump>>,
}

impl RoundLog {
    /// Equality on everything except timing and cache counters.
    pub fn same_trajectory(&self, other: &RoundLog) -> bool {
        self.round == other.round
            && self.coreset_size == other.coreset_size
            && self.batch == other.batch
            && self.weights == other.weights
            && self.temperature == other.temperature
            && self.gains == other.gains
            && self.rewards == other.rewards
            && self.alpha == other.alpha
            && self.base_val_accuracy == other.base_val_accuracy
            && self.val_accuracy == other.val_accuracy
            && self.flagged == other.flagged
            && self.agreement == other.agreement
    }
}

#[derive(Clone, Debug)]
pub struct SelectionRun {
    pub method: Method,
    pub budget: usize,
    /// Coreset in commit order.
    pub selected: Vec<usize>,
    pub rounds: Vec<RoundLog>,
    pub final_val_accuracy: f64,
    pub final_val_recall: Vec<f64>,
    pub final_test_accuracy: Option<f64>,
    pub embedding_space: EmbeddingSpace,
    pub model: ProbeModel,
}

impl SelectionRun {
    pub fn weight_history(&self) -> Vec<StrategyWeights> {
        self.rounds.iter().map(|r| r.weights).collect()
    }

    pub fn total_distance_evals(&self) -> u64 {
        self.rounds.iter().map(|r| r.distance_evals).sum()
    }

    pub fn evaluate_test(&mut self, test: &Dataset) -> Result<f64> {
        let idx: Vec<usize> = (0..test.len()).collect();
        let acc = self.model.accuracy(test, &idx)?;
        self.final_test_accuracy = Some(acc);
        Ok(acc)
    }
}

/// Shared state of one run.
struct Session<'a> {
    cfg: &'a RunConfig,
    data: &'a Dataset,
    val: &'a [usize],
    emb: Embeddings,
    budget: usize,
    pool: Vec<usize>,
    coreset: Vec<usize>,
    model: ProbeModel,
    table: ScoreTable,
    epochs_done: usize,
    rounds: Vec<RoundLog>,
}

impl<'a> Session<'a> {
    fn start(cfg: &'a RunConfig, data: &'a Dataset, split: &'a SplitSpec, track_diversity: bool) -> Result<Self> {
        cfg.validate()?;
        let mut pool = split.pool_indices.clone();
        pool.sort_unstable();
        pool.dedup();
        let budget = cfg.budget.resolve(pool.len())?;
        let init_count = ((cfg.init_fraction * budget as f64).round() as usize).clamp(1, budget);
        let space = EmbeddingSpace::choose(data.dim(), cfg.projection_dim);
        let (emb, _): (Embeddings, Option<Projection>) = Embeddings::build(data, &pool, space)?;

        let init = stratified_sample(data, &pool, init_count, derive_seed(cfg.seed, purpose::INIT, 0))?;
        let mut model = ProbeModel::init(data.dim(), data.class_count(), derive_seed(cfg.seed, purpose::MODEL, 0))?
            .with_temperature(cfg.probe.temperature)?;
        let start = Instant::now();
        remove_all(&mut pool, &init);
        let report = model
            .train(
                data,
                &init,
                &split.val_indices,
                &cfg.probe.train_config(),
                derive_seed(cfg.seed, purpose::PROBE, 0),
            )
            .map_err(|e| round_failed(0, e))?;

        let mut table = ScoreTable::new(data.len(), data.class_count(), cfg.smoothing, cfg.caching);
        if track_diversity {
            table.commit_batch(data, &emb, &init, &init, &pool);
        } else {
            table.recount_class_counts(data, &init);
        }
        let stats = table.stats();
        let ctl = ControllerState::new(&cfg.controller);
        let seed_round = RoundLog {
            round: 0,
            coreset_size: init.len(),
            batch: init.clone(),
            weights: ctl.weights,
            temperature: ctl.temperature,
            gains: [0.0; NUM_STRATEGIES],
            rewards: [0.0; NUM_STRATEGIES],
            alpha: ctl.alpha,
            base_val_accuracy: 0.0,
            val_accuracy: report.final_val_accuracy,
            grad_norm: report.grad_norm_last,
            flagged: None,
            agreement: None,
            model_cache_hits: stats.model_hits,
            model_cache_misses: stats.model_misses,
            distance_evals: stats.distance_evals,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            scores: None,
        };
        Ok(Self {
            cfg,
            data,
            val: &split.val_indices,
            emb,
            budget,
            pool,
            coreset: init,
            model,
            table,
            epochs_done: cfg.probe.epochs,
            rounds: vec![seed_round],
        })
    }

    fn commit(&mut self, batch: &[usize], track_diversity: bool) {
        self.coreset.extend_from_slice(batch);
        remove_all(&mut self.pool, batch);
        if track_diversity {
            self.table.commit_batch(self.data, &self.emb, batch, &self.coreset, &self.pool);
        }
    }

    fn retrain(&mut self, round: usize) -> Result<f64> {
        if !self.cfg.probe.warm_start {
            self.model = ProbeModel::init(
                self.data.dim(),
                self.data.class_count(),
                derive_seed(self.cfg.seed, purpose::MODEL, round as u64),
            )?
            .with_temperature(self.cfg.probe.temperature)?;
        }
        let report = self
            .model
            .train(
                self.data,
                &self.coreset,
                self.val,
                &self.cfg.probe.train_config(),
                derive_seed(self.cfg.seed, purpose::PROBE, round as u64),
            )
            .map_err(|e| round_failed(round, e))?;
        self.epochs_done += self.cfg.probe.epochs;
        Ok(report.final_val_accuracy)
    }

    fn finish(self, method: Method, selected: Vec<usize>) -> Result<SelectionRun> {
        Ok(SelectionRun {
            method,
            budget: self.budget,
            final_val_accuracy: self.model.accuracy(self.data, self.val)?,
            final_val_recall: self.model.per_class_recall(self.data, self.val)?,
            final_test_accuracy: None,
            embedding_space: self.emb.space,
            selected,
            rounds: self.rounds,
            model: self.model,
        })
    }

    fn score_dump(&self, weights: &StrategyWeights) -> Vec<ScoreDump> {
        self.pool
            .iter()
            .map(|&i| ScoreDump {
                sample_id: i,
                raw: *self.table.raw(i),
                normalized: *self.table.normalized(i),
                combined: crate::scoring::combined_score(self.table.normalized(i), weights),
            })
            .collect()
    }
}

fn round_failed(round: usize, e: Error) -> Error {
    match e {
        Error::Diverged { .. } => Error::RoundFailed {
            round,
            source: Box::new(e),
        },
        other => other,
    }
}

fn remove_all(pool: &mut Vec<usize>, batch: &[usize]) {
    let mut drop = batch.to_vec();
    drop.sort_unstable();
    pool.retain(|i| drop.binary_search(i).is_err());
}

/// Inputs to one strategy-gain measurement.
pub struct GainProbe<'a> {
    pub data: &'a Dataset,
    pub table: &'a ScoreTable,
    pub coreset: &'a [usize],
    pub pool: &'a [usize],
    pub model: &'a ProbeModel,
    pub val: &'a [usize],
    /// Validation accuracy of `model` before any temporary addition.
    pub base_accuracy: f64,
    pub seed: u64,
}

/// Validation gain from fine-tuning a copy of the model on the coreset plus
/// the strategy's top `strategy_eval_k` pool samples. Nothing is committed.
pub fn evaluate_strategy_gain(j: StrategyId, cfg: &RunConfig, probe: &GainProbe<'_>) -> Result<f64> {
    if cfg.strategy_eval_epochs == 0 || probe.pool.is_empty() {
        return Ok(0.0);
    }
    let column = probe.table.normalized_column(j, probe.pool);
    let k = cfg.strategy_eval_k.min(probe.pool.len());
    let mut temp: Vec<usize> = probe.coreset.to_vec();
    temp.extend(select_topk(&column, k)?.into_iter().map(|p| probe.pool[p]));
    let mut model = probe.model.clone();
    let train = TrainConfig {
        epochs: cfg.strategy_eval_epochs,
        ..cfg.probe.train_config()
    };
    model.train(probe.data, &temp, probe.val, &train, probe.seed)?;
    Ok(model.accuracy(probe.data, probe.val)? - probe.base_accuracy)
}

/// Adaptive multi-strategy selection.
pub fn run_mode(cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    let mut s = Session::start(cfg, data, split, true)?;
    let mut selected = s.coreset.clone();
    let schedule = round_schedule(s.budget, s.coreset.len(), cfg.round_fraction);
    let total_epochs = (cfg.probe.epochs * (schedule.len() + 1)) as f64;
    let mut ctl = ControllerState::new(&cfg.controller);
    let net = cfg
        .controller
        .use_network
        .then(|| WeightNet::seeded(derive_seed(cfg.seed, purpose::CONTROLLER, 0)));

    for (t, &n_t) in schedule.iter().enumerate() {
        let round = t + 1;
        let start = Instant::now();
        let before = s.table.stats();

        s.table.prepare(&s.model, data, &s.pool);
        let base_accuracy = s.model.accuracy(data, s.val)?;
        let grad = s.model.grad_magnitude(data, &s.coreset)?;
        let probe = GainProbe {
            data,
            table: &s.table,
            coreset: &s.coreset,
            pool: &s.pool,
            model: &s.model,
            val: s.val,
            base_accuracy,
            seed: derive_seed(cfg.seed, purpose::EVAL, round as u64),
        };
        let gains: Vec<f64> = StrategyId::ALL
            .par_iter()
            .map(|&j| evaluate_strategy_gain(j, cfg, &probe))
            .collect::<Result<_>>()
            .map_err(|e| round_failed(round, e))?;
        let gains: [f64; NUM_STRATEGIES] = gains.try_into().expect("four strategies");

        let remaining = (s.budget - s.coreset.len()) as f64 / s.budget as f64;
        ctl.observe(s.epochs_done as f64 / total_epochs, base_accuracy, grad, remaining);
        ctl = round_update(&ctl, &cfg.controller, &gains, net.as_ref());

        let (flagged, agreement) = match agreement_thresholds(&s.table, &s.pool) {
            Ok(th) => {
                let (per, agree) = th.summary(s.pool.iter().map(|&i| s.table.normalized(i)));
                (Some(per), Some(agree))
            }
            Err(_) => (None, None),
        };
        let combined = s.table.combined(&s.pool, &ctl.weights);
        let batch: Vec<usize> = select_topk(&combined, n_t)?.into_iter().map(|p| s.pool[p]).collect();
        let scores = cfg.dump_scores.then(|| s.score_dump(&ctl.weights));

        s.commit(&batch, true);
        let val_accuracy = s.retrain(round)?;
        selected.extend_from_slice(&batch);
        let after = s.table.stats();
        s.rounds.push(RoundLog {
            round,
            coreset_size: s.coreset.len(),
            batch,
            weights: ctl.weights,
            temperature: ctl.temperature,
            gains,
            rewards: ctl.last_rewards,
            alpha: ctl.alpha,
            base_val_accuracy: base_accuracy,
            val_accuracy,
            grad_norm: grad,
            flagged,
            agreement,
            model_cache_hits: after.model_hits - before.model_hits,
            model_cache_misses: after.model_misses - before.model_misses,
            distance_evals: after.distance_evals - before.distance_evals,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            scores,
        });
    }
    s.finish(Method::Mode, selected)
}

fn run_baseline(method: Method, cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    let track = method == Method::Kcenter;
    let mut s = Session::start(cfg, data, split, track)?;
    let mut selected = s.coreset.clone();
    let schedule = round_schedule(s.budget, s.coreset.len(), cfg.round_fraction);
    for (t, &n_t) in schedule.iter().enumerate() {
        let round = t + 1;
        let start = Instant::now();
        let before = s.table.stats();
        let base_accuracy = s.model.accuracy(data, s.val)?;
        let batch: Vec<usize> = match method {
            Method::Random => {
                let mut rng = derive_rng(cfg.seed, purpose::BASELINE, round as u64);
                let mut pick: Vec<usize> = s.pool.choose_multiple(&mut rng, n_t).copied().collect();
                pick.sort_unstable();
                pick
            }
            Method::Uncertainty => {
                s.table.refresh_model_scores(&s.model, data, &s.pool);
                let u: Vec<f64> = s
                    .pool
                    .iter()
                    .map(|&i| s.table.raw(i)[StrategyId::Uncertainty.index()])
                    .collect();
                select_topk(&u, n_t)?.into_iter().map(|p| s.pool[p]).collect()
            }
            Method::Kcenter => kcenter_greedy(&s.emb, s.table.min_dist(), &s.pool, n_t),
            Method::Mode | Method::ModeStreaming => unreachable!("not a baseline"),
        };
        s.commit(&batch, track);
        let val_accuracy = s.retrain(round)?;
        selected.extend_from_slice(&batch);
        let after = s.table.stats();
        s.rounds.push(RoundLog {
            round,
            coreset_size: s.coreset.len(),
            batch,
            weights: StrategyWeights::UNIFORM,
            temperature: cfg.controller.tau0,
            gains: [0.0; NUM_STRATEGIES],
            rewards: [0.0; NUM_STRATEGIES],
            alpha: [1.0; NUM_STRATEGIES],
            base_val_accuracy: base_accuracy,
            val_accuracy,
            grad_norm: 0.0,
            flagged: None,
            agreement: None,
            model_cache_hits: after.model_hits - before.model_hits,
            model_cache_misses: after.model_misses - before.model_misses,
            distance_evals: after.distance_evals - before.distance_evals,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            scores: None,
        });
    }
    s.finish(method, selected)
}

/// Uniformly random batches.
pub fn baseline_random(cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    run_baseline(Method::Random, cfg, data, split)
}

/// Highest predictive entropy first.
pub fn baseline_uncertainty(cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    run_baseline(Method::Uncertainty, cfg, data, split)
}

/// Farthest-point (k-center greedy) batches.
pub fn baseline_kcenter(cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    run_baseline(Method::Kcenter, cfg, data, split)
}

/// One-pass selection with fixed strategy weights.
///
/// After the stratified seed coreset and one probe fit, the pool is
/// streamed in ascending id order through [`sieve_stream`] on a
/// [`WeightedCoverage`] objective: diversity enters as facility-location
/// coverage (scaled by `budget / |pool|` so one pick's coverage gain is at
/// most 1), the other strategies as their normalized scores.
pub fn run_streaming(
    cfg: &RunConfig,
    weights: &StrategyWeights,
    data: &Dataset,
    split: &SplitSpec,
) -> Result<SelectionRun> {
    let mut s = Session::start(cfg, data, split, true)?;
    let mut selected = s.coreset.clone();
    let start = Instant::now();
    let before = s.table.stats();
    let base_accuracy = s.model.accuracy(data, s.val)?;
    let stream_budget = s.budget - s.coreset.len();
    let batch = if stream_budget == 0 {
        Vec::new()
    } else {
        s.table.prepare(&s.model, data, &s.pool);
        let modular: Vec<f64> = s
            .pool
            .iter()
            .map(|&i| {
                let row = s.table.normalized(i);
                StrategyId::ALL
                    .iter()
                    .filter(|&&j| j != StrategyId::Diversity)
                    .map(|&j| weights.get(j) * row[j.index()])
                    .sum()
            })
            .collect();
        let coverage_weight = weights.get(StrategyId::Diversity) * stream_budget as f64 / s.pool.len() as f64;
        let objective = WeightedCoverage::new(&s.emb, s.pool.clone(), modular, coverage_weight);
        let order: Vec<usize> = (0..s.pool.len()).collect();
        let result = sieve_stream(&objective, &order, stream_budget, cfg.stream_epsilon);
        result.selected.into_iter().map(|p| s.pool[p]).collect::<Vec<_>>()
    };
    s.commit(&batch, true);
    let val_accuracy = if batch.is_empty() {
        base_accuracy
    } else {
        s.retrain(1)?
    };
    selected.extend_from_slice(&batch);
    let after = s.table.stats();
    s.rounds.push(RoundLog {
        round: 1,
        coreset_size: s.coreset.len(),
        batch,
        weights: *weights,
        temperature: cfg.controller.tau0,
        gains: [0.0; NUM_STRATEGIES],
        rewards: [0.0; NUM_STRATEGIES],
        alpha: [1.0; NUM_STRATEGIES],
        base_val_accuracy: base_accuracy,
        val_accuracy,
        grad_norm: 0.0,
        flagged: None,
        agreement: None,
        model_cache_hits: after.model_hits - before.model_hits,
        model_cache_misses: after.model_misses - before.model_misses,
        distance_evals: after.distance_evals - before.distance_evals,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        scores: None,
    });
    s.finish(Method::ModeStreaming, selected)
}

/// Dispatches on `method`; the streaming variant uses uniform weights.
pub fn run_method(method: Method, cfg: &RunConfig, data: &Dataset, split: &SplitSpec) -> Result<SelectionRun> {
    match method {
        Method::Mode => run_mode(cfg, data, split),
        Method::ModeStreaming => run_streaming(cfg, &StrategyWeights::UNIFORM, data, split),
        Method::Random => baseline_random(cfg, data, split),
        Method::Uncertainty => baseline_uncertainty(cfg, data, split),
        Method::Kcenter => baseline_kcenter(cfg, data, split),
    }
}
