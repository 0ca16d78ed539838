//! Array-averaged energy of the quantized samples and the likelihood-ratio
//! amplitude test built on it.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::ncx2::{ncx2_ln_pdf, Ncx2Params};
use crate::error::{invalid, Result};
use crate::modem::{ConstellationSpec, Ring};
use crate::quantize::QuantizerSpec;

/// `Lambda_i = (1/U) sum_u |q_R,u,i|^2` for the real (`i = 0`) and imaginary
/// (`i = 1`) components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyStat {
    pub lambda: [f64; 2],
}

pub fn energy_statistic(q: &[Complex64]) -> Result<EnergyStat> {
    if q.is_empty() {
        return Err(invalid("energy statistic needs at least one antenna"));
    }
    let n = q.len() as f64;
    let (re, im) = q.iter().fold((0.0, 0.0), |(a, b), s| (a + s.re * s.re, b + s.im * s.im));
    Ok(EnergyStat { lambda: [re / n, im / n] })
}

/// Amplitude hypothesis for a pair of adjacent uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Same ring on both uses (`b1 = 0`).
    H0,
    /// Ring changed (`b1 = 1`).
    H1,
}

impl Hypothesis {
    pub fn amplitude_bit(self) -> u8 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Parameters of the per-component energy density shared by both rings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub antennas: usize,
    pub alpha: f64,
    pub eta: f64,
    pub sigma_tilde2: f64,
    pub psi0: f64,
    pub psi1: f64,
}

impl EnergyModel {
    pub fn params(&self, ring: Ring) -> Ncx2Params {
        Ncx2Params {
            antennas: self.antennas,
            alpha: self.alpha,
            x_tilde: match ring {
                Ring::Inner => self.psi0,
                Ring::Outer => self.psi1,
            },
            eta: self.eta,
            sigma_tilde2: self.sigma_tilde2,
        }
    }

    /// Chooses `eta` and `sigma_tilde2` (with `alpha = 1`) so that the model
    /// mean `x~^2 eta^2 + sigma_tilde2` equals the exact expected energy of
    /// the grouped quantizer output on each ring, averaged over a unit-power
    /// Rayleigh channel with noise variance `sigma_z2`.
    pub fn moment_matched(qspec: &QuantizerSpec, spec: &ConstellationSpec, sigma_z2: f64) -> Result<Self> {
        let mean_energy = |amp: f64| -> f64 {
            // each real component is N(0, (amp^2 + sigma_z2) / 2)
            let sd = ((amp * amp + sigma_z2) / 2.0).sqrt();
            let total: f64 = qspec
                .groups()
                .iter()
                .map(|g| {
                    let p_high = 0.5 * libm::erfc(g.threshold / sd * FRAC_1_SQRT_2);
                    g.len() as f64 * (g.high * g.high * p_high + g.low * g.low * (1.0 - p_high))
                })
                .sum();
            total / qspec.antennas() as f64
        };
        let (psi0, psi1) = (spec.psi0(), spec.psi1());
        let mu0 = mean_energy(psi0);
        let mu1 = mean_energy(psi1);
        let eta2 = (mu1 - mu0) / (psi1 * psi1 - psi0 * psi0);
        let sigma_tilde2 = mu0 - psi0 * psi0 * eta2;
        if !(eta2 > 0.0 && sigma_tilde2 > 0.0) {
            return Err(invalid(
                "quantizer output energy does not separate the two rings; energy test unavailable",
            ));
        }
        Ok(Self { antennas: qspec.antennas(), alpha: 1.0, eta: eta2.sqrt(), sigma_tilde2, psi0, psi1 })
    }

    fn ln_pair(&self, stat: &EnergyStat, ring: Ring) -> Result<f64> {
        let p = self.params(ring);
        Ok(ncx2_ln_pdf(stat.lambda[0], &p)? + ncx2_ln_pdf(stat.lambda[1], &p)?)
    }
}

fn ln_mean_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (0.5 * ((a - hi).exp() + (b - hi).exp())).ln()
}

/// Likelihood-ratio test between "same ring" and "ring changed", averaging
/// the two ring assignments of each hypothesis with equal prior. Ties go to
/// `H0`.
pub fn lrt_amplitude_test(now: &EnergyStat, prev: &EnergyStat, model: &EnergyModel) -> Result<Hypothesis> {
    let n0 = model.ln_pair(now, Ring::Inner)?;
    let n1 = model.ln_pair(now, Ring::Outer)?;
    let p0 = model.ln_pair(prev, Ring::Inner)?;
    let p1 = model.ln_pair(prev, Ring::Outer)?;
    let h0 = ln_mean_exp(n0 + p0, n1 + p1);
    let h1 = ln_mean_exp(n1 + p0, n0 + p1);
    Ok(if h1 > h0 { Hypothesis::H1 } else { Hypothesis::H0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ConstellationSpec {
        ConstellationSpec::new(8, 2.0).unwrap()
    }

    #[test]
    fn sign_labels_have_unit_energy() {
        let q = vec![Complex64::new(1.0, -1.0), Complex64::new(-1.0, -1.0), Complex64::new(1.0, 1.0)];
        let e = energy_statistic(&q).unwrap();
        assert_eq!(e.lambda, [1.0, 1.0]);
        assert!(energy_statistic(&[]).is_err());
    }

    #[test]
    fn one_antenna_per_group() {
        let s = spec();
        let q = vec![
            Complex64::new(s.psi1(), s.psi1()),
            Complex64::new(1.0, -1.0),
            Complex64::new(-s.psi0(), -s.psi0()),
        ];
        let e = energy_statistic(&q).unwrap();
        assert!((e.lambda[0] - 1.0).abs() < 1e-15);
        assert!((e.lambda[1] - 1.0).abs() < 1e-15);
    }

    fn model() -> EnergyModel {
        let s = spec();
        let q = QuantizerSpec::vql([32, 32, 32], &s).unwrap();
        EnergyModel::moment_matched(&q, &s, 0.01).unwrap()
    }

    #[test]
    fn equal_energies_favour_h0() {
        let m = model();
        for l in [0.5, 0.64, 0.7, 0.76, 0.9] {
            let e = EnergyStat { lambda: [l, l] };
            assert_eq!(lrt_amplitude_test(&e, &e, &m).unwrap(), Hypothesis::H0);
        }
    }

    #[test]
    fn separated_energies_favour_h1() {
        let m = model();
        let lo = m.params(Ring::Inner).mean();
        let hi = m.params(Ring::Outer).mean();
        let now = EnergyStat { lambda: [hi, hi] };
        let prev = EnergyStat { lambda: [lo, lo] };
        assert_eq!(lrt_amplitude_test(&now, &prev, &m).unwrap(), Hypothesis::H1);
        assert_eq!(lrt_amplitude_test(&prev, &now, &m).unwrap(), Hypothesis::H1);
    }

    #[test]
    fn component_swap_invariance() {
        let m = model();
        let a = EnergyStat { lambda: [0.62, 0.79] };
        let b = EnergyStat { lambda: [0.70, 0.66] };
        let swap = |e: EnergyStat| EnergyStat { lambda: [e.lambda[1], e.lambda[0]] };
        assert_eq!(
            lrt_amplitude_test(&a, &b, &m).unwrap(),
            lrt_amplitude_test(&swap(a), &swap(b), &m).unwrap()
        );
    }

    #[test]
    fn pure_sign_array_has_no_energy_model() {
        let s = spec();
        let q = QuantizerSpec::sign(12).unwrap();
        assert!(EnergyModel::moment_matched(&q, &s, 0.01).is_err());
    }
}
