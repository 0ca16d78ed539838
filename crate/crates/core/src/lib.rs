//! Differential amplitude/phase-shift keying (DAPSK) over a single-user
//! massive-MIMO uplink whose base station digitizes every antenna with a
//! one-bit ADC.
//!
//! The crate is organised bottom-up:
//!
//! * [`modem`]: Gray-coded PSK map and the two-ring differential encoder.
//! * [`channel`]: frequency-selective Rayleigh channel and AWGN.
//! * [`quantize`]: sign and variable-quantization-level (VQL) quantizers plus
//!   Bussgang linearization constants.
//! * [`detect`]: real-domain transforms, the joint one-bit ML detector, the
//!   VQL phase detector, the energy statistic and its non-central chi-square
//!   likelihood test.
//! * [`neural`]: a small from-scratch MLP used as the amplitude detector.
//! * [`baseline`]: pilot-aided coherent one-bit reference receiver.
//! * [`harness`]: Monte-Carlo campaigns, metrics and CSV/SVG output.

pub mod baseline;
pub mod channel;
pub mod detect;
pub mod error;
pub mod harness;
pub mod modem;
pub mod neural;
pub mod quantize;

pub use error::{Error, Result};
pub use num_complex::Complex64;
