//! Multinomial logistic-regression probe.
//!
//! The probe supplies everything model-dependent in the selection loop:
//! class probabilities for the uncertainty and boundary scores, validation
//! accuracy, and the gradient magnitude that enters the controller state.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeModel {
    classes: usize,
    dim: usize,
    /// Row-major `classes x dim`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    temperature: f64,
    version: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            lr: 0.01,
            batch: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub final_val_accuracy: f64,
    pub grad_norm_last: f64,
    pub epochs_run: usize,
}

/// Mean cross-entropy gradient, split by parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.bias)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// Numerically stable softmax of `logits / temperature`, in place.
pub(crate) fn softmax_in_place(logits: &mut [f64], temperature: f64) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = ((*z - max) / temperature).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

impl ProbeModel {
    /// Weights i.i.d. uniform in `[-0.01, 0.01]`, zero bias, T = 1.
    pub fn init(dim: usize, classes: usize, seed: u64) -> Result<Self> {
        if dim == 0 || classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "probe needs dim >= 1 and classes >= 2 (got {dim}, {classes})"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let weights = (0..dim * classes).map(|_| rng.random_range(-0.01..=0.01)).collect();
        Ok(Self {
            classes,
            dim,
            weights,
            bias: vec![0.0; classes],
            temperature: 1.0,
            version: 0,
        })
    }

    pub fn from_parts(dim: usize, classes: usize, weights: Vec<f64>, bias: Vec<f64>, temperature: f64) -> Result<Self> {
        if weights.len() != dim * classes || bias.len() != classes {
            return Err(Error::InvalidArgument("parameter shapes do not match dim/classes".into()));
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!("temperature must be > 0, got {temperature}")));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter".into()));
        }
        Ok(Self {
            classes,
            dim,
            weights,
            bias,
            temperature,
            version: 0,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!("temperature must be > 0, got {temperature}")));
        }
        self.temperature = temperature;
        Ok(self)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Bumped by every call to [`ProbeModel::train`]; score caches key on it.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_dataset(&self, ds: &Dataset) -> Result<()> {
        if ds.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: ds.dim(),
            });
        }
        if ds.class_count() != self.classes {
            return Err(Error::DimensionMismatch {
                expected: self.classes,
                got: ds.class_count(),
            });
        }
        Ok(())
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let w = &self.weights[c * self.dim..(c + 1) * self.dim];
            *o = self.bias[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// `softmax((Wx + b) / T)` without a dimension check.
    pub(crate) fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.classes];
        self.logits_into(x, &mut p);
        softmax_in_place(&mut p, self.temperature);
        p
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.proba(x))
    }

    /// Arg-max class, lowest id on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let p = self.predict_proba(x)?;
        Ok(argmax(&p))
    }

    pub fn accuracy(&self, ds: &Dataset, idx: &[usize]) -> Result<f64> {
        self.check_dataset(ds)?;
        if idx.is_empty() {
            return Ok(0.0);
        }
        let correct = idx
            .iter()
            .filter(|&&i| argmax(&self.proba(ds.row(i))) == ds.label(i))
            .count();
        Ok(correct as f64 / idx.len() as f64)
    }

    /// Recall per class over `idx`; classes absent from `idx` get NaN.
    pub fn per_class_recall(&self, ds: &Dataset, idx: &[usize]) -> Result<Vec<f64>> {
        self.check_dataset(ds)?;
        let mut hit = vec![0usize; self.classes];
        let mut total = vec![0usize; self.classes];
        for &i in idx {
            let y = ds.label(i);
            total[y] += 1;
            if argmax(&self.proba(ds.row(i))) == y {
                hit[y] += 1;
            }
        }
        Ok(hit
            .iter()
            .zip(&total)
            .map(|(&h, &t)| if t == 0 { f64::NAN } else { h as f64 / t as f64 })
            .collect())
    }

    /// Mean cross-entropy over `idx`.
    pub fn loss(&self, ds: &Dataset, idx: &[usize]) -> Result<f64> {
        self.check_dataset(ds)?;
        if idx.is_empty() {
            return Err(Error::EmptySet);
        }
        let total: f64 = idx
            .iter()
            .map(|&i| {
                let mut z = vec![0.0; self.classes];
                self.logits_into(ds.row(i), &mut z);
                log_softmax_at(&z, self.temperature, ds.label(i))
            })
            .sum();
        Ok(-total / idx.len() as f64)
    }

    fn accumulate_gradient(&self, ds: &Dataset, idx: &[usize], grad: &mut Gradient) {
        let scale = 1.0 / (idx.len() as f64 * self.temperature);
        for &i in idx {
            let x = ds.row(i);
            let mut p = self.proba(x);
            p[ds.label(i)] -= 1.0;
            for (c, &delta) in p.iter().enumerate() {
                let g = delta * scale;
                grad.bias[c] += g;
                for (gw, xv) in grad.weights[c * self.dim..(c + 1) * self.dim].iter_mut().zip(x) {
                    *gw += g * xv;
                }
            }
        }
    }

    /// Mean cross-entropy gradient over `idx`.
    pub fn gradient(&self, ds: &Dataset, idx: &[usize]) -> Result<Gradient> {
        self.check_dataset(ds)?;
        if idx.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut grad = Gradient {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.classes],
        };
        self.accumulate_gradient(ds, idx, &mut grad);
        Ok(grad)
    }

    /// L2 norm of the full (weights and bias) mean cross-entropy gradient.
    pub fn grad_magnitude(&self, ds: &Dataset, idx: &[usize]) -> Result<f64> {
        Ok(self.gradient(ds, idx)?.norm())
    }

    /// Mini-batch SGD on mean cross-entropy. Each epoch visits `train_idx`
    /// in a fresh seeded shuffle; the loss recorded per epoch is the full
    /// training loss after that epoch's updates.
    pub fn train(
        &mut self,
        ds: &Dataset,
        train_idx: &[usize],
        val_idx: &[usize],
        cfg: &TrainConfig,
        seed: u64,
    ) -> Result<TrainReport> {
        self.check_dataset(ds)?;
        if train_idx.is_empty() {
            return Err(Error::EmptySet);
        }
        if cfg.epochs == 0 || cfg.batch == 0 {
            return Err(Error::InvalidArgument("epochs and batch must be >= 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        let mut order = train_idx.to_vec();
        let mut grad = Gradient {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.classes],
        };
        let mut epoch_losses = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch) {
                grad.weights.iter_mut().for_each(|g| *g = 0.0);
                grad.bias.iter_mut().for_each(|g| *g = 0.0);
                self.accumulate_gradient(ds, batch, &mut grad);
                for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
                    *w -= cfg.lr * g;
                }
                for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
                    *b -= cfg.lr * g;
                }
            }
            let loss = self.loss(ds, train_idx)?;
            if !loss.is_finite() || self.weights.iter().chain(&self.bias).any(|v| !v.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            epoch_losses.push(loss);
        }
        self.version += 1;
        Ok(TrainReport {
            epochs_run: epoch_losses.len(),
            epoch_losses,
            final_val_accuracy: self.accuracy(ds, val_idx)?,
            grad_norm_last: self.grad_magnitude(ds, train_idx)?,
        })
    }

    /// JSON checkpoint; parameters are a base64 blob of little-endian f32,
    /// weights (row-major) followed by bias.
    pub fn to_checkpoint(&self) -> Result<String> {
        let mut blob = Vec::with_capacity((self.weights.len() + self.classes) * 4);
        for v in self.weights.iter().chain(&self.bias) {
            blob.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            classes: self.classes,
            dim: self.dim,
            temperature: self.temperature,
            version: self.version,
            params: BASE64.encode(blob),
        };
        Ok(serde_json::to_string_pretty(&ck)?)
    }

    pub fn from_checkpoint(json: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(json)?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", ck.format)));
        }
        let blob = BASE64
            .decode(ck.params.as_bytes())
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        let expected = (ck.classes * ck.dim + ck.classes) * 4;
        if blob.len() != expected {
            return Err(Error::Checkpoint(format!(
                "parameter blob has {} bytes, expected {expected}",
                blob.len()
            )));
        }
        let mut values: Vec<f64> = blob
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
            .collect();
        let bias = values.split_off(ck.classes * ck.dim);
        let mut model = Self::from_parts(ck.dim, ck.classes, values, bias, ck.temperature)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        model.version = ck.version;
        Ok(model)
    }
}

const CHECKPOINT_FORMAT: &str = "modesel-probe/1";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    classes: usize,
    dim: usize,
    temperature: f64,
    version: u64,
    params: String,
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn log_softmax_at(z: &[f64], temperature: f64, k: usize) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = z.iter().map(|v| ((v - max) / temperature).exp()).sum::<f64>().ln();
    (z[k] - max) / temperature - lse
}
