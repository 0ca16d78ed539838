use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Probabilities are clipped into `[PROB_FLOOR, 1 - PROB_FLOOR]` before the
/// logarithm of the loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
}

/// Fully connected layer `phi(W w + beta)`; `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

/// Multilayer perceptron with ReLU hidden layers and a softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
    /// SNR grid (dB) the one-hot part of the input refers to; empty when the
    /// model is not tied to a grid.
    pub snr_grid_db: Vec<f64>,
}

impl MlpModel {
    /// Checks that dimensions chain and that only the last layer is softmax.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("model needs at least one layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(invalid(format!(
                    "layer {k} produces {} values but layer {} expects {}",
                    pair[0].outputs(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
        }
        let last = layers.len() - 1;
        for (k, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.outputs() {
                return Err(invalid(format!("layer {k} bias length does not match its outputs")));
            }
            let expected = if k == last { Activation::Softmax } else { Activation::Relu };
            if layer.activation != expected {
                return Err(invalid(format!("layer {k} must use {expected:?} activation")));
            }
        }
        Ok(Self { layers, snr_grid_db: Vec::new() })
    }

    /// He-initialised weights, zero biases.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], output_dim: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(invalid("layer widths must be positive"));
        }
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(output_dim);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, d)| {
                let scale = (2.0 / d[0] as f64).sqrt();
                DenseLayer {
                    weights: Array2::from_shape_simple_fn((d[1], d[0]), || {
                        scale * rng.sample::<f64, _>(StandardNormal)
                    }),
                    bias: Array1::zeros(d[1]),
                    activation: if k == last { Activation::Softmax } else { Activation::Relu },
                }
            })
            .collect();
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Forward pass for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.forward_batch(x)?.row(0).to_vec())
    }

    /// Forward pass for a `batch x input_dim` matrix; returns `batch x outputs`.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(inputs)?.pop().expect("at least the input"))
    }

    /// Activations of every layer, the input first.
    fn forward_cached(&self, inputs: ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        if inputs.ncols() != self.input_dim() {
            return Err(invalid(format!(
                "model expects {} inputs, got {}",
                self.input_dim(),
                inputs.ncols()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(inputs.to_owned());
        for layer in &self.layers {
            let prev = acts.last().expect("non-empty");
            let mut z = prev.dot(&layer.weights.t());
            z += &layer.bias;
            match layer.activation {
                Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
                Activation::Softmax => softmax_rows(&mut z),
            }
            acts.push(z);
        }
        Ok(acts)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

/// Mean cross-entropy `-(1/V) sum_v omega[v]^T ln w[v]`.
pub fn bce_loss(probs: ArrayView2<f64>, labels: ArrayView2<f64>) -> Result<f64> {
    if probs.dim() != labels.dim() {
        return Err(invalid(format!(
            "probability batch {:?} and label batch {:?} differ in shape",
            probs.dim(),
            labels.dim()
        )));
    }
    if probs.nrows() == 0 {
        return Err(invalid("empty batch"));
    }
    let total: f64 = probs
        .iter()
        .zip(labels.iter())
        .map(|(&p, &y)| if y == 0.0 { 0.0 } else { -y * p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR).ln() })
        .sum();
    Ok(total / probs.nrows() as f64)
}

/// Gradients of the loss with respect to every weight matrix and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
            .fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Loss and exact gradients for one batch. The ReLU subgradient at zero is 0.
pub fn backward(model: &MlpModel, inputs: ArrayView2<f64>, labels: ArrayView2<f64>) -> Result<(f64, Gradients)> {
    let acts = model.forward_cached(inputs)?;
    let probs = acts.last().expect("output");
    let loss = bce_loss(probs.view(), labels)?;
    let batch = inputs.nrows() as f64;

    // softmax + cross-entropy: dL/dz = (p - y) / V
    let mut delta = (probs - &labels) / batch;
    let n = model.layers.len();
    let mut gw = Vec::with_capacity(n);
    let mut gb = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let a_prev = &acts[k];
        gw.push(delta.t().dot(a_prev));
        gb.push(delta.sum_axis(Axis(0)));
        if k > 0 {
            let mut back = delta.dot(&model.layers[k].weights);
            back.zip_mut_with(a_prev, |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    gw.reverse();
    gb.reverse();
    Ok((loss, Gradients { weights: gw, biases: gb }))
}

/// Amplitude bit from the softmax output: index 0 wins ties.
pub fn predict_amplitude_bit(probs: &[f64]) -> u8 {
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = k;
        }
    }
    best as u8
}
