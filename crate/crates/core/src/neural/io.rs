//! Model files: versioned JSON.
//!
//! ```json
//! {
//!   "format": "onebit-dapsk-mlp",
//!   "version": 1,
//!   "input_dim": 10,
//!   "output_dim": 2,
//!   "snr_grid_db": [0.0, 5.0],
//!   "layers": [
//!     { "inputs": 10, "outputs": 64, "activation": "relu",
//!       "weights": [ ... outputs * inputs values, row-major ... ],
//!       "bias": [ ... outputs values ... ] }
//!   ]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so loading reproduces
//! every weight bit for bit.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::{Activation, DenseLayer, MlpModel};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "onebit-dapsk-mlp";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    input_dim: usize,
    output_dim: usize,
    snr_grid_db: Vec<f64>,
    layers: Vec<LayerFile>,
}

pub fn to_json(model: &MlpModel) -> String {
    let file = ModelFile {
        format: MODEL_FORMAT.to_owned(),
        version: MODEL_VERSION,
        input_dim: model.input_dim(),
        output_dim: model.output_dim(),
        snr_grid_db: model.snr_grid_db.clone(),
        layers: model
            .layers()
            .iter()
            .map(|l| LayerFile {
                inputs: l.inputs(),
                outputs: l.outputs(),
                activation: l.activation,
                weights: l.weights.iter().copied().collect(),
                bias: l.bias.to_vec(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model is always serialisable")
}

/// Parses a model file body; errors carry a human-readable reason.
pub fn from_json(text: &str) -> std::result::Result<MlpModel, String> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if file.format != MODEL_FORMAT {
        return Err(format!("unexpected format '{}', expected '{MODEL_FORMAT}'", file.format));
    }
    if file.version != MODEL_VERSION {
        return Err(format!("unsupported version {}, expected {MODEL_VERSION}", file.version));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (k, l) in file.layers.into_iter().enumerate() {
        if l.bias.len() != l.outputs {
            return Err(format!("layer {k}: {} biases for {} outputs", l.bias.len(), l.outputs));
        }
        let weights = Array2::from_shape_vec((l.outputs, l.inputs), l.weights)
            .map_err(|_| format!("layer {k}: weight count does not match {}x{}", l.outputs, l.inputs))?;
        if weights.iter().chain(l.bias.iter()).any(|w| !w.is_finite()) {
            return Err(format!("layer {k}: non-finite parameter"));
        }
        layers.push(DenseLayer { weights, bias: Array1::from(l.bias), activation: l.activation });
    }
    let mut model = MlpModel::from_layers(layers).map_err(|e| e.to_string())?;
    if model.input_dim() != file.input_dim || model.output_dim() != file.output_dim {
        return Err(format!(
            "header says {}->{} but layers give {}->{}",
            file.input_dim,
            file.output_dim,
            model.input_dim(),
            model.output_dim()
        ));
    }
    model.snr_grid_db = file.snr_grid_db;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model)).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    from_json(&text).map_err(|reason| Error::ModelFormat { path: path.to_owned(), reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> MlpModel {
        let mut m = MlpModel::new(5, &[7, 3], 2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        m.snr_grid_db = vec![0.0, 7.5];
        m
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let m = model();
        let back = from_json(&to_json(&m)).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.layers().iter().zip(m.layers()) {
            for (x, y) in a.weights.iter().zip(b.weights.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn rejects_wrong_version_and_format() {
        let text = to_json(&model());
        let v2 = text.replace("\"version\": 1", "\"version\": 2");
        assert!(from_json(&v2).unwrap_err().contains("version"));
        let other = text.replace(MODEL_FORMAT, "something-else");
        assert!(from_json(&other).unwrap_err().contains("format"));
    }

    #[test]
    fn rejects_truncated_and_inconsistent_files() {
        let text = to_json(&model());
        assert!(from_json(&text[..text.len() / 2]).is_err());
        let bad_dim = text.replacen("\"input_dim\": 5", "\"input_dim\": 6", 1);
        assert!(from_json(&bad_dim).is_err());
    }
}
