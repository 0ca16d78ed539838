//! Frequency-selective Rayleigh uplink channel.
//!
//! Every antenna sees `L` i.i.d. `CN(0, 1)` taps that stay fixed over a block
//! of `N` channel uses. The gain at use `v` is the `N`-point DFT of the
//! PDP-weighted taps:
//!
//! `h_u[v] = sum_l sqrt(p[l]) g_u[l] exp(-j 2 pi l v / N)`
//!
//! so that `E|h_u[v]|^2 = sum_l p[l] = 1`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Draws a circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Tap powers `p[0..L]`, normalised to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile(Vec<f64>);

impl PowerDelayProfile {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(invalid("power delay profile needs at least one tap"));
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("tap powers must be finite and non-negative"));
        }
        let total: f64 = powers.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("tap powers must sum to 1, got {total}")));
        }
        Ok(Self(powers))
    }

    pub fn uniform(taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(invalid("power delay profile needs at least one tap"));
        }
        Self::new(vec![1.0 / taps as f64; taps])
    }

    /// `p[l]` proportional to `exp(-decay * l)`.
    pub fn exponential(taps: usize, decay: f64) -> Result<Self> {
        if taps == 0 {
            return Err(invalid("power delay profile needs at least one tap"));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(invalid(format!("exponential decay must be >= 0, got {decay}")));
        }
        let raw: Vec<f64> = (0..taps).map(|l| (-decay * l as f64).exp()).collect();
        let total: f64 = raw.iter().sum();
        Self::new(raw.into_iter().map(|p| p / total).collect())
    }

    pub fn taps(&self) -> usize {
        self.0.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    /// Mean excess delay in taps.
    pub fn mean_delay(&self) -> f64 {
        self.0.iter().enumerate().map(|(l, p)| l as f64 * p).sum()
    }

    /// `E[h[v] h*[v-1]]` over the tap ensemble for block length `uses`.
    pub fn adjacent_correlation(&self, uses: usize) -> Complex64 {
        self.0
            .iter()
            .enumerate()
            .map(|(l, p)| Complex64::from_polar(*p, -2.0 * PI * l as f64 / uses as f64))
            .sum()
    }
}

/// Static channel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    antennas: usize,
    uses: usize,
    pdp: PowerDelayProfile,
    sigma_z2: f64,
}

impl ChannelConfig {
    pub fn new(antennas: usize, uses: usize, pdp: PowerDelayProfile, sigma_z2: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(invalid("need at least one antenna"));
        }
        if pdp.taps() > uses {
            return Err(invalid(format!(
                "tap count {} exceeds channel uses per block {uses}",
                pdp.taps()
            )));
        }
        if !(sigma_z2.is_finite() && sigma_z2 >= 0.0) {
            return Err(invalid(format!("noise variance must be >= 0, got {sigma_z2}")));
        }
        Ok(Self { antennas, uses, pdp, sigma_z2 })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn uses(&self) -> usize {
        self.uses
    }

    pub fn pdp(&self) -> &PowerDelayProfile {
        &self.pdp
    }

    pub fn sigma_z2(&self) -> f64 {
        self.sigma_z2
    }
}

/// One block-fading draw: `taps` is `U x L`, `gains` is `U x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Array2<Complex64>,
    pub gains: Array2<Complex64>,
}

impl ChannelRealization {
    /// Builds the per-use gains from explicit taps.
    pub fn from_taps(taps: Array2<Complex64>, pdp: &PowerDelayProfile, uses: usize) -> Result<Self> {
        if taps.ncols() != pdp.taps() {
            return Err(invalid(format!(
                "tap matrix has {} columns but profile has {} taps",
                taps.ncols(),
                pdp.taps()
            )));
        }
        let gains = frequency_response(&taps, pdp, uses);
        Ok(Self { taps, gains })
    }

    /// A frequency-flat channel with the given per-antenna gains.
    pub fn flat(gains: &[Complex64], uses: usize) -> Self {
        let taps = Array2::from_shape_fn((gains.len(), 1), |(u, _)| gains[u]);
        let gains = Array2::from_shape_fn((gains.len(), uses), |(u, _)| gains[u]);
        Self { taps, gains }
    }

    pub fn antennas(&self) -> usize {
        self.gains.nrows()
    }

    pub fn uses(&self) -> usize {
        self.gains.ncols()
    }
}

/// Evaluates `sum_l sqrt(p[l]) g_u[l] exp(-j 2 pi l v / N)` for every antenna
/// and use.
pub fn frequency_response(
    taps: &Array2<Complex64>,
    pdp: &PowerDelayProfile,
    uses: usize,
) -> Array2<Complex64> {
    let twiddle: Vec<Complex64> = (0..uses)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / uses as f64))
        .collect();
    let amp: Vec<f64> = pdp.powers().iter().map(|p| p.sqrt()).collect();
    let mut gains = Array2::zeros((taps.nrows(), uses));
    for (u, row) in taps.outer_iter().enumerate() {
        let weighted: Vec<Complex64> = row.iter().zip(&amp).map(|(g, a)| g * a).collect();
        for v in 0..uses {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, w) in weighted.iter().enumerate() {
                acc += w * twiddle[(l * v) % uses];
            }
            gains[[u, v]] = acc;
        }
    }
    gains
}

/// Draws a block-fading channel realization.
pub fn gen_channel<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> ChannelRealization {
    let taps = Array2::from_shape_simple_fn((cfg.antennas, cfg.pdp.taps()), || complex_normal(rng, 1.0));
    let gains = frequency_response(&taps, &cfg.pdp, cfg.uses);
    ChannelRealization { taps, gains }
}

/// `y_u[v] = h_u[v] x[v] + z_u[v]` with `z ~ CN(0, sigma_z2)`.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Complex64],
    ch: &ChannelRealization,
    sigma_z2: f64,
    rng: &mut R,
) -> Result<Array2<Complex64>> {
    if x.len() != ch.uses() {
        return Err(invalid(format!(
            "symbol sequence has length {} but the channel spans {} uses",
            x.len(),
            ch.uses()
        )));
    }
    if !(sigma_z2.is_finite() && sigma_z2 >= 0.0) {
        return Err(invalid(format!("noise variance must be >= 0, got {sigma_z2}")));
    }
    let mut y = Array2::zeros(ch.gains.raw_dim());
    for ((u, v), out) in y.indexed_iter_mut() {
        let noise = if sigma_z2 > 0.0 { complex_normal(rng, sigma_z2) } else { Complex64::new(0.0, 0.0) };
        *out = ch.gains[[u, v]] * x[v] + noise;
    }
    Ok(y)
}

/// Ring transition hypothesised between two adjacent uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingStep {
    /// `b1 = 0`: amplitude ratio 1.
    Keep,
    /// `b1 = 1` from the inner to the outer ring: ratio `psi1 / psi0`.
    InnerToOuter,
    /// `b1 = 1` from the outer to the inner ring: ratio `psi0 / psi1`.
    OuterToInner,
}

impl RingStep {
    pub const ALL: [RingStep; 3] = [RingStep::Keep, RingStep::OuterToInner, RingStep::InnerToOuter];

    /// Amplitude ratio `a'[v]` for ring ratio `a = psi1 / psi0`.
    pub fn amplitude_ratio(self, ring_ratio: f64) -> f64 {
        match self {
            RingStep::Keep => 1.0,
            RingStep::InnerToOuter => ring_ratio,
            RingStep::OuterToInner => 1.0 / ring_ratio,
        }
    }

    pub fn amplitude_bit(self) -> u8 {
        match self {
            RingStep::Keep => 0,
            _ => 1,
        }
    }
}

/// Variance of the differential noise `z[v] - a' s z[v-1]`, i.e.
/// `sigma_z2 (1 + a'^2)`.
pub fn diff_noise_var(step: RingStep, sigma_z2: f64, ring_ratio: f64) -> f64 {
    let r = step.amplitude_ratio(ring_ratio);
    sigma_z2 * (1.0 + r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pdp_validation() {
        assert!(PowerDelayProfile::new(vec![0.5, 0.4]).is_err());
        assert!(PowerDelayProfile::new(vec![]).is_err());
        assert!(PowerDelayProfile::new(vec![1.5, -0.5]).is_err());
        let u = PowerDelayProfile::uniform(31).unwrap();
        assert!((u.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let e = PowerDelayProfile::exponential(31, 0.5).unwrap();
        assert!((e.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e.powers()[0] > e.powers()[1]);
    }

    #[test]
    fn config_validation() {
        let pdp = PowerDelayProfile::uniform(31).unwrap();
        assert!(ChannelConfig::new(0, 256, pdp.clone(), 0.1).is_err());
        assert!(ChannelConfig::new(4, 16, pdp.clone(), 0.1).is_err());
        assert!(ChannelConfig::new(4, 256, pdp, -1.0).is_err());
    }

    #[test]
    fn single_tap_is_frequency_flat() {
        let cfg = ChannelConfig::new(3, 64, PowerDelayProfile::uniform(1).unwrap(), 0.0).unwrap();
        let ch = gen_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        for u in 0..3 {
            for v in 0..64 {
                assert_eq!(ch.gains[[u, v]], ch.taps[[u, 0]]);
            }
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let cfg = ChannelConfig::new(8, 256, PowerDelayProfile::uniform(31).unwrap(), 0.1).unwrap();
        let a = gen_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(99));
        let b = gen_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_unit_channel_is_identity() {
        let x: Vec<Complex64> = (0..16).map(|k| Complex64::new(k as f64, -0.5)).collect();
        let ch = ChannelRealization::flat(&[Complex64::new(1.0, 0.0)], 16);
        let y = apply_channel(&x, &ch, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for v in 0..16 {
            assert_eq!(y[[0, v]], x[v]);
        }
        assert!(apply_channel(&x[..8], &ch, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn pure_noise_has_requested_variance() {
        let ch = ChannelRealization::flat(&vec![Complex64::new(1.0, 0.0); 64], 256);
        let x = vec![Complex64::new(0.0, 0.0); 256];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..10 {
            let y = apply_channel(&x, &ch, 0.3, &mut rng).unwrap();
            acc += y.iter().map(|s| s.norm_sqr()).sum::<f64>();
            n += y.len();
        }
        let var = acc / n as f64;
        assert!((var / 0.3 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn diff_noise_variances() {
        assert_eq!(diff_noise_var(RingStep::Keep, 1.0, 2.0), 2.0);
        assert!((diff_noise_var(RingStep::OuterToInner, 1.0, 2.0) - 1.25).abs() < 1e-15);
        assert!((diff_noise_var(RingStep::InnerToOuter, 1.0, 2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_adjacent_correlation_of_uniform_profile() {
        let c = PowerDelayProfile::uniform(31).unwrap().adjacent_correlation(256);
        // magnitude sin(L t/2) / (L sin(t/2)) with t = 2 pi / N
        let t = 2.0 * PI / 256.0;
        let mag = (31.0 * t / 2.0).sin() / (31.0 * (t / 2.0).sin());
        assert!((c.norm() - mag).abs() < 1e-12);
        assert!((c.arg() + 15.0 * t).abs() < 1e-12);
    }
}
