//! One-bit sign quantizers, grouped variable-quantization-level (VQL)
//! quantizers and the Bussgang linearization `q = eta * y + eps`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Range;

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::RingStep;
use crate::error::{invalid, Result};
use crate::modem::ConstellationSpec;

/// `sign` with `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One-bit ADC: `sign(Re y) + j sign(Im y)`.
#[inline]
pub fn sign_quantize(y: Complex64) -> Complex64 {
    Complex64::new(sign(y.re), sign(y.im))
}

/// Comparator shared by all antennas of one group. Each real component maps
/// to `high` when it is at or above `threshold` and to `low` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantGroup {
    pub antennas: Range<usize>,
    pub threshold: f64,
    pub low: f64,
    pub high: f64,
}

impl QuantGroup {
    pub fn sign(antennas: Range<usize>) -> Self {
        Self { antennas, threshold: 0.0, low: -1.0, high: 1.0 }
    }

    pub fn is_sign(&self) -> bool {
        self.threshold == 0.0 && self.low == -1.0 && self.high == 1.0
    }

    pub fn len(&self) -> usize {
        self.antennas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.antennas.is_empty()
    }

    #[inline]
    fn component(&self, x: f64) -> f64 {
        if x >= self.threshold {
            self.high
        } else {
            self.low
        }
    }
}

/// Partition of the array into quantization groups.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    groups: Vec<QuantGroup>,
    antennas: usize,
}

impl QuantizerSpec {
    /// Groups must tile `0..U` contiguously and in order; every label must
    /// lie strictly on its own side of the threshold.
    pub fn new(groups: Vec<QuantGroup>) -> Result<Self> {
        let mut next = 0;
        for (j, g) in groups.iter().enumerate() {
            if g.antennas.start != next {
                return Err(invalid(format!(
                    "group {j} starts at antenna {} but {next} was expected",
                    g.antennas.start
                )));
            }
            if !(g.low < g.threshold && g.threshold < g.high) {
                return Err(invalid(format!(
                    "group {j} labels ({}, {}) do not straddle threshold {}",
                    g.low, g.high, g.threshold
                )));
            }
            next = g.antennas.end;
        }
        if next == 0 {
            return Err(invalid("quantizer must cover at least one antenna"));
        }
        Ok(Self { groups, antennas: next })
    }

    /// Every antenna uses the sign quantizer.
    pub fn sign(antennas: usize) -> Result<Self> {
        Self::new(vec![QuantGroup::sign(0..antennas)])
    }

    /// Three-group VQL layout: group 1 labels `{psi0, psi1}` around
    /// `zeta = psi0 (1 + a cos(pi/4)) / 2`, group 2 is the sign quantizer and
    /// group 3 mirrors group 1 with labels `{-psi1, -psi0}` around `-zeta`.
    pub fn vql(sizes: [usize; 3], spec: &ConstellationSpec) -> Result<Self> {
        if sizes[1] == 0 {
            return Err(invalid("the sign (phase) group must not be empty"));
        }
        let zeta = vql_threshold(spec);
        let b1 = sizes[0];
        let b2 = b1 + sizes[1];
        let b3 = b2 + sizes[2];
        let mut groups = Vec::with_capacity(3);
        if sizes[0] > 0 {
            groups.push(QuantGroup { antennas: 0..b1, threshold: zeta, low: spec.psi0(), high: spec.psi1() });
        }
        groups.push(QuantGroup::sign(b1..b2));
        if sizes[2] > 0 {
            groups.push(QuantGroup { antennas: b2..b3, threshold: -zeta, low: -spec.psi1(), high: -spec.psi0() });
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> &[QuantGroup] {
        &self.groups
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Antennas quantized with the plain sign function.
    pub fn sign_antennas(&self) -> Vec<usize> {
        self.groups.iter().filter(|g| g.is_sign()).flat_map(|g| g.antennas.clone()).collect()
    }

    /// Quantizes a `U x N` matrix of received samples.
    pub fn quantize(&self, y: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        if y.nrows() != self.antennas {
            return Err(invalid(format!(
                "received matrix has {} antennas, quantizer expects {}",
                y.nrows(),
                self.antennas
            )));
        }
        let mut q = Array2::zeros(y.raw_dim());
        for g in &self.groups {
            for u in g.antennas.clone() {
                for (out, s) in q.row_mut(u).iter_mut().zip(y.row(u)) {
                    *out = vql_quantize(*s, g);
                }
            }
        }
        Ok(q)
    }
}

/// Interior threshold of the outer VQL groups.
pub fn vql_threshold(spec: &ConstellationSpec) -> f64 {
    spec.psi0() * (1.0 + spec.ring_ratio() * FRAC_PI_4.cos()) / 2.0
}

/// Quantizes the real and imaginary parts of `y` with `group`'s comparator.
#[inline]
pub fn vql_quantize(y: Complex64, group: &QuantGroup) -> Complex64 {
    Complex64::new(group.component(y.re), group.component(y.im))
}

/// Bussgang gain and distortion variance of a quantizer driven by Gaussian
/// input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangParams {
    pub eta: f64,
    /// Variance of the complex distortion `eps = q - eta * y`.
    pub sigma_eps2: f64,
}

/// Bussgang constants of the complex sign quantizer when each real component
/// of the input is zero-mean Gaussian with variance `component_var`.
///
/// `eta = sqrt(2 / (pi * component_var))` and
/// `sigma_eps2 = E|q|^2 - eta^2 E|y|^2 = 2 - 4 / pi`.
pub fn bussgang_params(component_var: f64) -> Result<BussgangParams> {
    if !(component_var.is_finite() && component_var > 0.0) {
        return Err(invalid(format!("input variance must be > 0, got {component_var}")));
    }
    let eta = (2.0 / (PI * component_var)).sqrt();
    let sigma_eps2 = 2.0 - eta * eta * 2.0 * component_var;
    Ok(BussgangParams { eta, sigma_eps2 })
}

/// Bussgang constants for a unit-power symbol through a unit-gain channel
/// plus noise of variance `sigma_z2`, i.e. `E|y|^2 = 1 + sigma_z2`.
pub fn bussgang_for_noise(sigma_z2: f64) -> Result<BussgangParams> {
    bussgang_params((1.0 + sigma_z2) / 2.0)
}

/// Variance of the combined thermal and quantization noise of the
/// differential model: `eta^2 rho_z + sigma_eps2 (1 + a'^2)`.
pub fn combined_noise_var(params: BussgangParams, step: RingStep, rho_z: f64, ring_ratio: f64) -> f64 {
    let r = step.amplitude_ratio(ring_ratio);
    params.eta * params.eta * rho_z + params.sigma_eps2 * (1.0 + r * r)
}
