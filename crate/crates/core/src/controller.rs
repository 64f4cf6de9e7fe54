//! Meta-controller: training state, temperature schedule, credit
//! assignment and simplex strategy weights.
//!
//! Each selection round the controller receives the validation gain of each
//! strategy and moves its weights toward a temperature-controlled softmax of
//! `1 + gamma * reward`, blending with the previous weights by `delta`. The
//! multiplicative effectiveness accumulator `alpha` is tracked alongside for
//! diagnostics. A small MLP over the training state can optionally supply
//! the softmax logits in place of the constant 1.

use std::collections::VecDeque;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::strategy::{StrategyWeights, NUM_STRATEGIES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub tau0: f64,
    /// Decay rate on consumed budget.
    pub alpha_decay: f64,
    /// Decay rate on epoch progress.
    pub beta_decay: f64,
    pub tau_min: f64,
    /// Step size of the multiplicative alpha accumulator.
    pub meta_lr: f64,
    /// Reward gain inside the softmax logits.
    pub reward_gain: f64,
    /// Blend factor between old weights and the softmax target.
    pub blend: f64,
    /// Rounds in the moving average of strategy gains.
    pub history_window: usize,
    /// Feed weight-network logits (plus scaled rewards) into the softmax.
    pub use_network: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            tau0: 1.0,
            alpha_decay: 1.0,
            beta_decay: 1.0,
            tau_min: 0.05,
            meta_lr: 0.001,
            reward_gain: 1.0,
            blend: 0.2,
            history_window: 3,
            use_network: false,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau0", self.tau0),
            ("alpha_decay", self.alpha_decay),
            ("beta_decay", self.beta_decay),
            ("tau_min", self.tau_min),
            ("meta_lr", self.meta_lr),
            ("reward_gain", self.reward_gain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("controller.{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.blend) {
            return Err(Error::Config(format!("controller.blend must lie in [0, 1], got {}", self.blend)));
        }
        if self.history_window == 0 {
            return Err(Error::Config("controller.history_window must be >= 1".into()));
        }
        Ok(())
    }
}

/// `max(tau_min, tau0 * exp(-alpha_decay * (1 - b)) * exp(-beta_decay * e))`
/// with `b` the remaining budget fraction and `e` the epoch progress.
pub fn temperature(cfg: &ControllerConfig, budget_remaining: f64, epoch_progress: f64) -> f64 {
    let raw = cfg.tau0 * (-cfg.alpha_decay * (1.0 - budget_remaining)).exp() * (-cfg.beta_decay * epoch_progress).exp();
    raw.max(cfg.tau_min)
}

/// Credit for one strategy: `delta * w` when `delta > 0`, else 0.
pub fn reward(delta_val: f64, weight: f64) -> f64 {
    if delta_val > 0.0 {
        delta_val * weight
    } else {
        0.0
    }
}

pub fn update_alpha(alpha: f64, meta_lr: f64, reward: f64) -> f64 {
    alpha * (1.0 + meta_lr * reward)
}

/// `exp(v_j / tau) / sum_k exp(v_k / tau)`, max-shifted.
pub fn softmax_weights(values: &[f64; NUM_STRATEGIES], tau: f64) -> StrategyWeights {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = values.map(|v| ((v - max) / tau).exp());
    let sum: f64 = e.iter().sum();
    StrategyWeights::normalized(e.map(|v| v / sum)).unwrap_or(StrategyWeights::UNIFORM)
}

/// `(1 - delta) * old + delta * target`, renormalized.
pub fn blend_weights(old: &StrategyWeights, target: &StrategyWeights, delta: f64) -> Result<StrategyWeights> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("blend factor must lie in [0, 1], got {delta}")));
    }
    let mut w = [0.0; NUM_STRATEGIES];
    for j in 0..NUM_STRATEGIES {
        w[j] = (1.0 - delta) * old[j] + delta * target[j];
    }
    StrategyWeights::normalized(w)
}

/// Two-layer ReLU network mapping the 8-dim state to 4 strategy logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightNet {
    /// Row-major `HIDDEN x INPUTS`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Row-major `NUM_STRATEGIES x HIDDEN`.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl WeightNet {
    pub const INPUTS: usize = 8;
    pub const HIDDEN: usize = 64;

    pub fn zeros() -> Self {
        Self {
            w1: vec![0.0; Self::HIDDEN * Self::INPUTS],
            b1: vec![0.0; Self::HIDDEN],
            w2: vec![0.0; NUM_STRATEGIES * Self::HIDDEN],
            b2: vec![0.0; NUM_STRATEGIES],
        }
    }

    /// Uniform `+-1/sqrt(fan_in)` weights, zero biases.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let s1 = 1.0 / (Self::INPUTS as f64).sqrt();
        let s2 = 1.0 / (Self::HIDDEN as f64).sqrt();
        Self {
            w1: (0..Self::HIDDEN * Self::INPUTS).map(|_| rng.random_range(-s1..=s1)).collect(),
            b1: vec![0.0; Self::HIDDEN],
            w2: (0..NUM_STRATEGIES * Self::HIDDEN).map(|_| rng.random_range(-s2..=s2)).collect(),
            b2: vec![0.0; NUM_STRATEGIES],
        }
    }

    pub fn logits(&self, input: &[f64; Self::INPUTS]) -> [f64; NUM_STRATEGIES] {
        let hidden: Vec<f64> = (0..Self::HIDDEN)
            .map(|h| {
                let row = &self.w1[h * Self::INPUTS..(h + 1) * Self::INPUTS];
                let z = self.b1[h] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                z.max(0.0)
            })
            .collect();
        let mut out = [0.0; NUM_STRATEGIES];
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.w2[j * Self::HIDDEN..(j + 1) * Self::HIDDEN];
            *o = self.b2[j] + row.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub epoch_progress: f64,
    pub val_accuracy: f64,
    /// Gradient norm divided by its running maximum.
    pub grad_norm: f64,
    pub budget_remaining: f64,
    /// Moving average of per-strategy validation gains.
    pub strategy_perf: [f64; NUM_STRATEGIES],
    pub alpha: [f64; NUM_STRATEGIES],
    pub weights: StrategyWeights,
    pub temperature: f64,
    pub round: usize,
    pub last_rewards: [f64; NUM_STRATEGIES],
    gain_history: VecDeque<[f64; NUM_STRATEGIES]>,
    grad_norm_max: f64,
}

impl ControllerState {
    pub fn new(cfg: &ControllerConfig) -> Self {
        Self {
            epoch_progress: 0.0,
            val_accuracy: 0.0,
            grad_norm: 0.0,
            budget_remaining: 1.0,
            strategy_perf: [0.0; NUM_STRATEGIES],
            alpha: [1.0; NUM_STRATEGIES],
            weights: StrategyWeights::UNIFORM,
            temperature: cfg.tau0.max(cfg.tau_min),
            round: 0,
            last_rewards: [0.0; NUM_STRATEGIES],
            gain_history: VecDeque::new(),
            grad_norm_max: 0.0,
        }
    }

    /// Records the training signals for the coming round.
    pub fn observe(&mut self, epoch_progress: f64, val_accuracy: f64, raw_grad_norm: f64, budget_remaining: f64) {
        self.epoch_progress = epoch_progress.clamp(0.0, 1.0);
        self.val_accuracy = val_accuracy.clamp(0.0, 1.0);
        self.budget_remaining = budget_remaining.clamp(0.0, 1.0);
        self.grad_norm_max = self.grad_norm_max.max(raw_grad_norm);
        self.grad_norm = if self.grad_norm_max > 0.0 {
            (raw_grad_norm / self.grad_norm_max).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }

    /// Network input `[e, a, g, b, v_u, v_d, v_c, v_b]`.
    pub fn features(&self) -> [f64; WeightNet::INPUTS] {
        let v = self.strategy_perf;
        [
            self.epoch_progress,
            self.val_accuracy,
            self.grad_norm,
            self.budget_remaining,
            v[0],
            v[1],
            v[2],
            v[3],
        ]
    }
}

/// Softmax of the network logits at temperature `tau`.
pub fn net_forward(net: &WeightNet, state: &ControllerState, tau: f64) -> StrategyWeights {
    softmax_weights(&net.logits(&state.features()), tau)
}

/// One controller step given this round's per-strategy validation gains.
///
/// `net` is consulted only when `cfg.use_network` is set.
pub fn round_update(
    state: &ControllerState,
    cfg: &ControllerConfig,
    gains: &[f64; NUM_STRATEGIES],
    net: Option<&WeightNet>,
) -> ControllerState {
    let tau = temperature(cfg, state.budget_remaining, state.epoch_progress);
    let mut rewards = [0.0; NUM_STRATEGIES];
    for j in 0..NUM_STRATEGIES {
        rewards[j] = reward(gains[j], state.weights[j]);
    }
    let base = match net {
        Some(net) if cfg.use_network => net.logits(&state.features()),
        _ => [1.0; NUM_STRATEGIES],
    };
    let mut values = [0.0; NUM_STRATEGIES];
    for j in 0..NUM_STRATEGIES {
        values[j] = base[j] + cfg.reward_gain * rewards[j];
    }
    let target = softmax_weights(&values, tau);
    let weights = blend_weights(&state.weights, &target, cfg.blend).unwrap_or(target);

    let mut next = state.clone();
    next.alpha = std::array::from_fn(|j| update_alpha(state.alpha[j], cfg.meta_lr, rewards[j]));
    next.gain_history.push_back(*gains);
    while next.gain_history.len() > cfg.history_window {
        next.gain_history.pop_front();
    }
    let m = next.gain_history.len() as f64;
    let mut perf = [0.0; NUM_STRATEGIES];
    for g in &next.gain_history {
        for j in 0..NUM_STRATEGIES {
            perf[j] += g[j] / m;
        }
    }
    next.strategy_perf = perf;
    next.weights = weights;
    next.temperature = tau;
    next.last_rewards = rewards;
    next.round += 1;
    next
}

/// Per-step L2 movement of a weight trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStats {
    pub per_step: Vec<f64>,
    pub cumulative: f64,
}

impl ConvergenceStats {
    /// Least-squares slope of `ln(delta_t)` against `t`, exponentiated.
    /// Steps below `floor` are ignored. `None` with fewer than two usable
    /// steps.
    pub fn geometric_rate(&self, floor: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .per_step
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > floor)
            .map(|(t, &d)| (t as f64, d.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        Some((sxy / sxx).exp())
    }

    /// First step index after which every step is below `tol`.
    pub fn settled_after(&self, tol: f64) -> Option<usize> {
        match self.per_step.iter().rposition(|&d| d >= tol) {
            None => Some(0),
            Some(last) if last + 1 < self.per_step.len() => Some(last + 1),
            Some(_) => None,
        }
    }
}

pub fn convergence_stats(history: &[StrategyWeights]) -> Result<ConvergenceStats> {
    if history.len() < 2 {
        return Err(Error::InvalidArgument("weight history needs at least two entries".into()));
    }
    let per_step: Vec<f64> = history.windows(2).map(|w| w[0].l2_distance(&w[1])).collect();
    let cumulative = per_step.iter().sum();
    Ok(ConvergenceStats { per_step, cumulative })
}
