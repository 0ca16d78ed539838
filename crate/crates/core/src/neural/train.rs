use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::model::{backward, bce_loss, MlpModel};
use crate::error::{invalid, Error, Result};

/// Optimiser and schedule. Defaults: `alpha = 0.001`, 250 epochs, mini-batches
/// of 1000 samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            learning_rate: adam.learning_rate,
            epochs: 250,
            batch_size: 1000,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(invalid(format!("learning rate must be >= 0, got {}", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid("epochs and batch size must be >= 1"));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }
}

/// Feature rows with one-hot labels (`[1, 0]` for bit 0, `[0, 1]` for bit 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: Array2<f64>,
    pub labels: Array2<f64>,
}

impl LabeledSet {
    pub fn new(features: Array2<f64>, labels: Array2<f64>) -> Result<Self> {
        if features.nrows() != labels.nrows() {
            return Err(invalid(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.nrows()
            )));
        }
        for row in labels.rows() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(invalid("labels must be one-hot"));
            }
        }
        Ok(Self { features, labels })
    }

    /// One-hot labels for a list of bits.
    pub fn from_bits(features: Array2<f64>, bits: &[u8]) -> Result<Self> {
        let labels = Array2::from_shape_fn((bits.len(), 2), |(i, j)| if bits[i] as usize == j { 1.0 } else { 0.0 });
        Self::new(features, labels)
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    /// Label bit of each sample.
    pub fn bits(&self) -> Vec<u8> {
        self.labels.rows().into_iter().map(|r| if r[1] == 1.0 { 1 } else { 0 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Loss of the untrained model on the full set.
    pub initial_loss: f64,
    /// Sample-weighted mean mini-batch loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Loss of the trained model on the full set.
    pub final_loss: f64,
}

fn full_loss(model: &MlpModel, set: &LabeledSet) -> Result<f64> {
    let probs = model.forward_batch(set.features.view())?;
    bce_loss(probs.view(), set.labels.view())
}

/// Mini-batch Adam training. Batch order is reshuffled every epoch from
/// `cfg.seed`, so a fixed seed reproduces the run exactly.
pub fn train(model: &mut MlpModel, set: &LabeledSet, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if set.is_empty() {
        return Err(invalid("training set is empty"));
    }
    let initial_loss = full_loss(model, set)?;
    if !initial_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0, loss: initial_loss });
    }
    let adam = cfg.adam();
    let mut state = AdamState::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let x = set.features.select(Axis(0), chunk);
            let y = set.labels.select(Axis(0), chunk);
            let (loss, grads) = backward(model, x.view(), y.view())?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, loss });
            }
            adam_step(model, &grads, &mut state, &adam);
            weighted += loss * chunk.len() as f64;
        }
        epoch_losses.push(weighted / set.len() as f64);
    }
    let final_loss = full_loss(model, set)?;
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs, loss: final_loss });
    }
    Ok(TrainReport { initial_loss, epoch_losses, final_loss })
}

/// Fraction of samples whose predicted bit matches the label.
pub fn accuracy(model: &MlpModel, set: &LabeledSet) -> Result<f64> {
    let probs = model.forward_batch(set.features.view())?;
    let hits = probs
        .rows()
        .into_iter()
        .zip(set.bits())
        .filter(|(p, b)| super::model::predict_amplitude_bit(p.as_slice().expect("contiguous")) == *b)
        .count();
    Ok(hits as f64 / set.len() as f64)
}
