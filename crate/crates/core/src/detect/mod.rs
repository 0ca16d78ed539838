//! Detectors operating on quantized antenna outputs.

pub mod bessel;
pub mod energy;
pub mod ncx2;
pub mod normal;
pub mod onebit;
pub mod realify;

pub use energy::{energy_statistic, lrt_amplitude_test, EnergyModel, EnergyStat, Hypothesis};
pub use ncx2::{ncx2_ln_pdf, ncx2_pdf, Ncx2Params};
pub use normal::{log_phi, phi};
pub use onebit::{
    candidate_set, onebit_loglik, onebit_ml_detect, vql_phase_detect, Candidate, Detection, RhoTable,
};
pub use realify::{realify, RealFrame};
