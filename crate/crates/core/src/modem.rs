//! Two-ring DAPSK modem.
//!
//! Each channel use carries `N_b = 1 + log2(M)` bits. The leading bit toggles
//! the ring (inner amplitude `psi0`, outer amplitude `psi1`); the remaining
//! bits select a Gray-coded M-PSK rotation that is accumulated onto the phase
//! of the previous symbol.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Ring geometry and alphabet size of a two-ring DAPSK constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationSpec {
    m: usize,
    ring_ratio: f64,
    psi0: f64,
    psi1: f64,
}

impl ConstellationSpec {
    /// Builds the constellation for `m` phases per ring and ring ratio
    /// `psi1 / psi0`, normalised so that `psi0^2 + psi1^2 = 2`.
    pub fn new(m: usize, ring_ratio: f64) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(invalid(format!("phases per ring must be a power of two >= 2, got {m}")));
        }
        if !(ring_ratio.is_finite() && ring_ratio > 1.0) {
            return Err(invalid(format!("ring ratio must be > 1, got {ring_ratio}")));
        }
        let psi0 = (2.0 / (1.0 + ring_ratio * ring_ratio)).sqrt();
        Ok(Self { m, ring_ratio, psi0, psi1: ring_ratio * psi0 })
    }

    /// Constellation for a total modulation order (`2M` points, two rings).
    pub fn from_order(order: usize, ring_ratio: f64) -> Result<Self> {
        if order < 4 || !order.is_multiple_of(2) {
            return Err(invalid(format!("DAPSK modulation order must be an even number >= 4, got {order}")));
        }
        Self::new(order / 2, ring_ratio)
    }

    pub fn phases(&self) -> usize {
        self.m
    }

    pub fn ring_ratio(&self) -> f64 {
        self.ring_ratio
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn psi1(&self) -> f64 {
        self.psi1
    }

    /// Number of points in the full constellation, `2M`.
    pub fn order(&self) -> usize {
        2 * self.m
    }

    pub fn phase_bits(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    pub fn bits_per_symbol(&self) -> usize {
        1 + self.phase_bits()
    }

    pub fn amplitude(&self, ring: Ring) -> f64 {
        match ring {
            Ring::Inner => self.psi0,
            Ring::Outer => self.psi1,
        }
    }

    /// The three admissible amplitude ratios `x~[v] / x~[v-1]`, in the order
    /// `[1, psi0/psi1, psi1/psi0]`.
    pub fn amplitude_ratios(&self) -> [f64; 3] {
        [1.0, self.psi0 / self.psi1, self.psi1 / self.psi0]
    }
}

/// Which of the two concentric rings a symbol sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    Inner,
    Outer,
}

impl Ring {
    pub fn toggled(self) -> Self {
        match self {
            Ring::Inner => Ring::Outer,
            Ring::Outer => Ring::Inner,
        }
    }
}

/// The `N_b` information bits of one channel use, amplitude bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("bit block must not be empty"));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(invalid(format!("bit values must be 0 or 1, got {b}")));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitude_bit(&self) -> u8 {
        self.0[0]
    }

    pub fn phase_bits(&self) -> &[u8] {
        &self.0[1..]
    }

    /// Draws a block of `n` uniform random bits.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random::<bool>() as u8).collect())
    }
}

/// Differential encoder state after the most recent symbol.
///
/// The phase is tracked as an integer index modulo `M` so that ring
/// membership holds exactly over arbitrarily long streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderState {
    pub ring: Ring,
    pub phase_index: usize,
}

impl Default for EncoderState {
    fn default() -> Self {
        Self { ring: Ring::Inner, phase_index: 0 }
    }
}

impl EncoderState {
    /// Amplitude `x~[v-1]` of the last emitted symbol.
    pub fn prev_amp(&self, spec: &ConstellationSpec) -> f64 {
        spec.amplitude(self.ring)
    }

    /// The last emitted symbol itself; for the initial state this is the
    /// reference symbol `psi0`.
    pub fn symbol(&self, spec: &ConstellationSpec) -> Complex64 {
        Complex64::from_polar(spec.amplitude(self.ring), phase_angle(self.phase_index, spec.m))
    }
}

fn phase_angle(index: usize, m: usize) -> f64 {
    2.0 * PI * index as f64 / m as f64
}

fn gray_encode(n: usize) -> usize {
    n ^ (n >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut n = g;
    while g > 1 {
        g >>= 1;
        n ^= g;
    }
    n
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn index_to_bits(value: usize, width: usize) -> Vec<u8> {
    (0..width).rev().map(|k| ((value >> k) & 1) as u8).collect()
}

fn check_phase_bits(bits: &[u8], m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!("M must be a power of two >= 2, got {m}")));
    }
    let width = m.trailing_zeros() as usize;
    if bits.len() != width {
        return Err(invalid(format!("expected {width} phase bits for M = {m}, got {}", bits.len())));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(invalid("bit values must be 0 or 1"));
    }
    Ok(())
}

/// Index `m` of the M-PSK point selected by Gray-coded `phase_bits`.
pub fn psk_index(phase_bits: &[u8], m: usize) -> Result<usize> {
    check_phase_bits(phase_bits, m)?;
    Ok(gray_decode(bits_to_index(phase_bits)))
}

/// Gray-coded M-PSK map: returns `exp(j 2 pi k / M)` for the Gray-decoded
/// index `k` of `phase_bits` (most significant bit first).
pub fn psk_map(phase_bits: &[u8], m: usize) -> Result<Complex64> {
    let k = psk_index(phase_bits, m)?;
    Ok(Complex64::from_polar(1.0, phase_angle(k, m)))
}

/// Index of the M-PSK point nearest in angle to `s`.
pub fn nearest_psk_index(s: Complex64, m: usize) -> Result<usize> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!("M must be a power of two >= 2, got {m}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) || s.norm() == 0.0 {
        return Err(invalid("cannot demap a zero or non-finite symbol"));
    }
    let turns = s.arg() / (2.0 * PI) * m as f64;
    Ok((turns.round() as i64).rem_euclid(m as i64) as usize)
}

/// Inverse of [`psk_map`]: Gray bits of the M-PSK point nearest to `s / |s|`.
pub fn psk_unmap(s: Complex64, m: usize) -> Result<Vec<u8>> {
    let k = nearest_psk_index(s, m)?;
    Ok(index_to_bits(gray_encode(k), m.trailing_zeros() as usize))
}

/// Differentially encodes `blocks` starting from `state`.
///
/// Returns the transmitted symbols and the state after the last one, so a
/// long stream can be encoded in chunks.
pub fn dapsk_encode(
    blocks: &[BitBlock],
    spec: &ConstellationSpec,
    state: EncoderState,
) -> Result<(Vec<Complex64>, EncoderState)> {
    let mut state = state;
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        if block.len() != spec.bits_per_symbol() {
            return Err(invalid(format!(
                "expected {} bits per block, got {}",
                spec.bits_per_symbol(),
                block.len()
            )));
        }
        if block.amplitude_bit() == 1 {
            state.ring = state.ring.toggled();
        }
        let rotation = psk_index(block.phase_bits(), spec.m)?;
        state.phase_index = (state.phase_index + rotation) % spec.m;
        out.push(state.symbol(spec));
    }
    Ok((out, state))
}

/// Rebuilds a bit block from a detected amplitude bit and phase rotation.
pub fn recover_bits(amp_bit: u8, s_hat: Complex64, m: usize) -> Result<BitBlock> {
    if amp_bit > 1 {
        return Err(invalid(format!("amplitude bit must be 0 or 1, got {amp_bit}")));
    }
    let mut bits = Vec::with_capacity(1 + m.trailing_zeros() as usize);
    bits.push(amp_bit);
    bits.extend(psk_unmap(s_hat, m)?);
    BitBlock::new(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn ring_amplitudes_for_default_ratio() {
        let spec = ConstellationSpec::new(8, 2.0).unwrap();
        assert!((spec.psi0() - 0.632_455_532_033_675_9).abs() < 1e-12);
        assert!((spec.psi1() - 1.264_911_064_067_351_7).abs() < 1e-12);
        assert!((spec.psi0().powi(2) + spec.psi1().powi(2) - 2.0).abs() < 1e-14);
        assert_eq!(spec.bits_per_symbol(), 4);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(ConstellationSpec::new(6, 2.0).is_err());
        assert!(ConstellationSpec::new(1, 2.0).is_err());
        assert!(ConstellationSpec::new(8, 1.0).is_err());
        assert!(ConstellationSpec::new(8, f64::NAN).is_err());
    }

    #[test]
    fn psk_map_examples() {
        assert!(close(psk_map(&[0, 0, 0], 8).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(psk_map(&[0, 0, 1], 8).unwrap(), Complex64::from_polar(1.0, PI / 4.0)));
        assert!(psk_map(&[0, 1], 8).is_err());
    }

    #[test]
    fn psk_map_enumerates_distinct_points() {
        let pts: Vec<Complex64> = (0..8)
            .map(|k| psk_map(&index_to_bits(k, 3), 8).unwrap())
            .collect();
        let mut angles: Vec<f64> = pts.iter().map(|p| p.arg().rem_euclid(2.0 * PI)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in angles.windows(2) {
            assert!((w[1] - w[0] - PI / 4.0).abs() < 1e-12);
        }
        for p in &pts {
            assert!((p.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for k in 0..16 {
            let a = gray_encode(k);
            let b = gray_encode((k + 1) % 16);
            assert_eq!((a ^ b).count_ones(), 1);
            assert_eq!(gray_decode(a), k);
        }
    }

    #[test]
    fn psk_unmap_examples() {
        assert_eq!(psk_unmap(Complex64::new(1.0, 0.0), 8).unwrap(), vec![0, 0, 0]);
        assert_eq!(
            psk_unmap(Complex64::from_polar(1.0, PI / 4.0 + 0.1), 8).unwrap(),
            vec![0, 0, 1]
        );
        assert_eq!(psk_unmap(Complex64::from_polar(1.7, -PI / 4.0), 8).unwrap(), vec![1, 0, 0]);
        assert!(psk_unmap(Complex64::new(0.0, 0.0), 8).is_err());
        for k in 0..32 {
            let bits = index_to_bits(k, 5);
            assert_eq!(psk_unmap(psk_map(&bits, 32).unwrap(), 32).unwrap(), bits);
        }
    }

    #[test]
    fn encoder_amplitude_rules() {
        let spec = ConstellationSpec::new(8, 2.0).unwrap();
        let keep = BitBlock::new(vec![0, 0, 0, 0]).unwrap();
        let flip = BitBlock::new(vec![1, 0, 0, 0]).unwrap();

        let (x, st) = dapsk_encode(std::slice::from_ref(&keep), &spec, EncoderState::default()).unwrap();
        assert!((x[0].norm() - spec.psi0()).abs() < 1e-12);
        assert_eq!(st.ring, Ring::Inner);

        let (x, st) = dapsk_encode(std::slice::from_ref(&flip), &spec, EncoderState::default()).unwrap();
        assert!((x[0].norm() - spec.psi1()).abs() < 1e-12);
        assert_eq!(st.ring, Ring::Outer);

        let (x, st) = dapsk_encode(&[flip.clone(), flip], &spec, EncoderState::default()).unwrap();
        assert!((x[1].norm() - spec.psi0()).abs() < 1e-12);
        assert_eq!(st.ring, Ring::Inner);
    }

    #[test]
    fn encoding_empty_stream_keeps_state() {
        let spec = ConstellationSpec::new(8, 2.0).unwrap();
        let init = EncoderState { ring: Ring::Outer, phase_index: 3 };
        let (x, st) = dapsk_encode(&[], &spec, init).unwrap();
        assert!(x.is_empty());
        assert_eq!(st, init);
    }

    #[test]
    fn encoder_rejects_wrong_block_length() {
        let spec = ConstellationSpec::new(8, 2.0).unwrap();
        let short = BitBlock::new(vec![1, 0, 1]).unwrap();
        assert!(dapsk_encode(&[short], &spec, EncoderState::default()).is_err());
    }

    #[test]
    fn recover_bits_examples() {
        assert_eq!(recover_bits(0, Complex64::new(1.0, 0.0), 8).unwrap().bits(), &[0, 0, 0, 0]);
        assert_eq!(
            recover_bits(1, Complex64::from_polar(1.0, PI / 4.0), 8).unwrap().bits(),
            &[1, 0, 0, 1]
        );
        assert!(recover_bits(0, Complex64::new(0.0, 0.0), 8).is_err());
    }

    #[test]
    fn chunked_encoding_matches_single_pass() {
        let spec = ConstellationSpec::new(16, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let blocks: Vec<BitBlock> = (0..100).map(|_| BitBlock::random(5, &mut rng)).collect();
        let (whole, end) = dapsk_encode(&blocks, &spec, EncoderState::default()).unwrap();
        let (a, mid) = dapsk_encode(&blocks[..37], &spec, EncoderState::default()).unwrap();
        let (b, end2) = dapsk_encode(&blocks[37..], &spec, mid).unwrap();
        assert_eq!(end, end2);
        assert_eq!([a, b].concat(), whole);
    }

    #[test]
    fn unit_average_power() {
        let spec = ConstellationSpec::new(8, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let blocks: Vec<BitBlock> = (0..100_000).map(|_| BitBlock::random(4, &mut rng)).collect();
        let (x, _) = dapsk_encode(&blocks, &spec, EncoderState::default()).unwrap();
        let p = x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((p - 1.0).abs() < 0.01, "mean power {p}");
    }
}
