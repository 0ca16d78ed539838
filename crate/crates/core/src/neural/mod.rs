//! From-scratch MLP amplitude detector: forward pass, cross-entropy loss,
//! backpropagation, Adam, dataset generation and the model file format.

pub mod adam;
pub mod dataset;
pub mod io;
pub mod model;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dataset::{generate_dataset, FeatureVector, USES_PER_BLOCK};
pub use io::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use model::{
    backward, bce_loss, predict_amplitude_bit, softmax_rows, Activation, DenseLayer, Gradients, MlpModel,
    PROB_FLOOR,
};
pub use train::{accuracy, train, LabeledSet, TrainConfig, TrainReport};
