use ndarray::{Array1, Array2, Zip};

use super::model::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let zw: Vec<_> = model.layers().iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect();
        let zb: Vec<_> = model.layers().iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect();
        Self { m_w: zw.clone(), v_w: zw, m_b: zb.clone(), v_b: zb, step: 0 }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(model: &mut MlpModel, grads: &Gradients, state: &mut AdamState, cfg: &AdamConfig) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let (b1, b2, lr, eps) = (cfg.beta1, cfg.beta2, cfg.learning_rate, cfg.epsilon);
    let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for (k, layer) in model.layers_mut().iter_mut().enumerate() {
        Zip::from(&mut layer.weights)
            .and(&mut state.m_w[k])
            .and(&mut state.v_w[k])
            .and(&grads.weights[k])
            .for_each(update);
        Zip::from(&mut layer.bias)
            .and(&mut state.m_b[k])
            .and(&mut state.v_b[k])
            .and(&grads.biases[k])
            .for_each(update);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::{Activation, DenseLayer};
    use ndarray::array;

    fn scalar_model(w: f64) -> MlpModel {
        MlpModel::from_layers(vec![DenseLayer {
            weights: array![[w], [0.0]],
            bias: array![0.0, 0.0],
            activation: Activation::Softmax,
        }])
        .unwrap()
    }

    fn grads(g: f64) -> Gradients {
        Gradients { weights: vec![array![[g], [0.0]]], biases: vec![array![0.0, 0.0]] }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut model = scalar_model(0.0);
        let mut st = AdamState::new(&model);
        adam_step(&mut model, &grads(1.0), &mut st, &AdamConfig::default());
        let w = model.layers()[0].weights[[0, 0]];
        assert!((w + 1e-3 / (1.0 + 1e-8)).abs() < 1e-15, "{w}");
        assert_eq!(st.step(), 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut model = scalar_model(0.4);
        let before = model.clone();
        let mut st = AdamState::new(&model);
        for _ in 0..3 {
            adam_step(&mut model, &grads(0.0), &mut st, &AdamConfig::default());
        }
        assert_eq!(model, before);
    }

    #[test]
    fn moments_make_the_optimizer_stateful() {
        let cfg = AdamConfig::default();
        let mut twice = scalar_model(0.0);
        let mut st = AdamState::new(&twice);
        adam_step(&mut twice, &grads(1.0), &mut st, &cfg);
        adam_step(&mut twice, &grads(1.0), &mut st, &cfg);

        // a single step on the accumulated gradient is normalised away
        let mut once = scalar_model(0.0);
        let mut st = AdamState::new(&once);
        adam_step(&mut once, &grads(2.0), &mut st, &cfg);

        assert_ne!(twice.layers()[0].weights[[0, 0]], once.layers()[0].weights[[0, 0]]);
    }
}
