//! Density of the array-averaged energy `Lambda` under a non-central
//! chi-square model with `2U` degrees of freedom.
//!
//! With `m = alpha^2 x~^2 eta^2` and composite noise variance `s2`,
//!
//! `f(L) = (U / s2) (L / m)^((U-1)/2) exp(-U (L + m) / s2) I_{U-1}(2U sqrt(L m) / s2)`
//!
//! whose mean is `m + s2`.

use super::bessel::ln_bessel_i;
use crate::error::{invalid, Result};

/// Parameters of the conditional energy density for one amplitude hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ncx2Params {
    pub antennas: usize,
    pub alpha: f64,
    pub x_tilde: f64,
    pub eta: f64,
    pub sigma_tilde2: f64,
}

impl Ncx2Params {
    fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(invalid("antenna count must be >= 1"));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("x_tilde", self.x_tilde),
            ("eta", self.eta),
            ("sigma_tilde2", self.sigma_tilde2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Non-centrality per antenna, `alpha^2 x~^2 eta^2`.
    pub fn signal_energy(&self) -> f64 {
        (self.alpha * self.x_tilde * self.eta).powi(2)
    }

    pub fn mean(&self) -> f64 {
        self.signal_energy() + self.sigma_tilde2
    }
}

/// `ln f(lambda)`.
pub fn ncx2_ln_pdf(lambda: f64, p: &Ncx2Params) -> Result<f64> {
    p.validate()?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("energy must be finite and >= 0, got {lambda}")));
    }
    let u = p.antennas as f64;
    let m = p.signal_energy();
    let s2 = p.sigma_tilde2;
    if lambda == 0.0 {
        return Ok(if p.antennas == 1 { (u / s2).ln() - u * m / s2 } else { f64::NEG_INFINITY });
    }
    let arg = 2.0 * u * (lambda * m).sqrt() / s2;
    Ok((u / s2).ln() + 0.5 * (u - 1.0) * (lambda / m).ln() - u * (lambda + m) / s2
        + ln_bessel_i(p.antennas as u32 - 1, arg))
}

pub fn ncx2_pdf(lambda: f64, p: &Ncx2Params) -> Result<f64> {
    Ok(ncx2_ln_pdf(lambda, p)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(u: usize) -> Ncx2Params {
        Ncx2Params { antennas: u, alpha: 1.0, x_tilde: 0.632, eta: 0.9, sigma_tilde2: 0.7 }
    }

    #[test]
    fn single_antenna_reduces_to_rician_energy() {
        // U = 1: f(L) = (1/s2) exp(-(L+m)/s2) I0(2 sqrt(L m)/s2)
        let p = params(1);
        let m = p.signal_energy();
        let l = 0.8;
        let direct = (1.0 / 0.7) * (-(l + m) / 0.7f64).exp() * ln_bessel_i(0, 2.0 * (l * m).sqrt() / 0.7).exp();
        assert!((ncx2_pdf(l, &p).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(ncx2_pdf(-0.1, &params(4)).is_err());
        assert!(ncx2_pdf(0.5, &Ncx2Params { sigma_tilde2: 0.0, ..params(4) }).is_err());
        assert!(ncx2_pdf(0.5, &Ncx2Params { antennas: 0, ..params(4) }).is_err());
        assert_eq!(ncx2_pdf(0.0, &params(4)).unwrap(), 0.0);
    }

    #[test]
    fn large_array_is_finite() {
        let p = params(512);
        let v = ncx2_pdf(p.mean(), &p).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}
