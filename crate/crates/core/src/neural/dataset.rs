//! Training data for the amplitude detector.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;

use super::train::LabeledSet;
use crate::detect::energy_statistic;
use crate::error::{invalid, Result};
use crate::harness::config::SimConfig;
use crate::harness::link::{column, stream_rng, transmit_differential, DATASET_STREAM};

/// Uses drawn from each simulated block. Fewer than `N - 1` so that samples
/// come from many channel realizations.
pub const USES_PER_BLOCK: usize = 32;

/// Detector input `{Lambda_1[v], Lambda_2[v], Lambda_1[v-1], Lambda_2[v-1]}`
/// followed by the one-hot SNR index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub lambda: [f64; 4],
    pub snr_onehot: Vec<f64>,
}

impl FeatureVector {
    pub fn new(now: [f64; 2], prev: [f64; 2], snr_index: usize, grid_len: usize) -> Result<Self> {
        if snr_index >= grid_len {
            return Err(invalid(format!("SNR index {snr_index} outside a grid of {grid_len} points")));
        }
        let mut snr_onehot = vec![0.0; grid_len];
        snr_onehot[snr_index] = 1.0;
        Ok(Self { lambda: [now[0], now[1], prev[0], prev[1]], snr_onehot })
    }

    pub fn dim(&self) -> usize {
        4 + self.snr_onehot.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.lambda);
        v.extend_from_slice(&self.snr_onehot);
        v
    }
}

/// Input width for a grid of `grid_len` SNR points.
pub fn feature_dim(grid_len: usize) -> usize {
    4 + grid_len
}

/// Draws `samples` labeled feature vectors. Each simulated block picks an SNR
/// uniformly from `cfg.snr_db` and contributes up to [`USES_PER_BLOCK`]
/// randomly chosen uses; the label is the amplitude bit carried by the use.
pub fn generate_dataset(cfg: &SimConfig, samples: usize, seed: u64) -> Result<LabeledSet> {
    if cfg.snr_db.is_empty() {
        return Err(invalid("dataset generation needs a non-empty SNR grid"));
    }
    let spec = cfg.constellation()?;
    let qspec = cfg.quantizer()?;
    let k = cfg.snr_db.len();
    let per_block = USES_PER_BLOCK.min(cfg.uses - 1);
    let mut features = Array2::zeros((samples, feature_dim(k)));
    let mut bits = Vec::with_capacity(samples);
    let mut block = 0u64;
    while bits.len() < samples {
        let mut rng = stream_rng(seed, DATASET_STREAM | block);
        block += 1;
        let snr_index = rng.random_range(0..k);
        let channel = cfg.channel(cfg.snr_db[snr_index])?;
        let tx = transmit_differential(&spec, &qspec, &channel, &mut rng)?;
        let picks = sample(&mut rng, cfg.uses - 1, per_block);
        for v in picks.into_iter().map(|i| i + 1) {
            if bits.len() == samples {
                break;
            }
            let now = energy_statistic(&column(&tx.q, v))?;
            let prev = energy_statistic(&column(&tx.q, v - 1))?;
            let fv = FeatureVector::new(now.lambda, prev.lambda, snr_index, k)?;
            let row = bits.len();
            features.row_mut(row).assign(&ndarray::ArrayView1::from(&fv.to_vec()));
            bits.push(tx.bits[v - 1].amplitude_bit());
        }
    }
    LabeledSet::from_bits(features, &bits)
}
