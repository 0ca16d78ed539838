//! Error tallies and per-point summary metrics.

use std::ops::{Add, AddAssign};

use super::config::Mode;

/// Error counts accumulated over data symbols. The reference symbol of a
/// differential block and the pilots of a coherent block are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub blocks: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
    pub amp_bits: u64,
    pub amp_bit_errors: u64,
    pub phase_bits: u64,
    pub phase_bit_errors: u64,
}

impl Tally {
    pub fn bits(&self) -> u64 {
        self.amp_bits + self.phase_bits
    }

    pub fn bit_errors(&self) -> u64 {
        self.amp_bit_errors + self.phase_bit_errors
    }

    /// Adds one detected symbol given its `amp_bits` leading amplitude bits.
    pub fn record(&mut self, sent: &[u8], detected: &[u8], amp_bits: usize) {
        debug_assert_eq!(sent.len(), detected.len());
        let wrong = |r: std::ops::Range<usize>| r.filter(|&i| sent[i] != detected[i]).count() as u64;
        let amp = wrong(0..amp_bits);
        let phase = wrong(amp_bits..sent.len());
        self.symbols += 1;
        self.symbol_errors += u64::from(amp + phase > 0);
        self.amp_bits += amp_bits as u64;
        self.amp_bit_errors += amp;
        self.phase_bits += (sent.len() - amp_bits) as u64;
        self.phase_bit_errors += phase;
    }
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            blocks: self.blocks + o.blocks,
            symbols: self.symbols + o.symbols,
            symbol_errors: self.symbol_errors + o.symbol_errors,
            amp_bits: self.amp_bits + o.amp_bits,
            amp_bit_errors: self.amp_bit_errors + o.amp_bit_errors,
            phase_bits: self.phase_bits + o.phase_bits,
            phase_bit_errors: self.phase_bit_errors + o.phase_bit_errors,
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        *self = *self + o;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Delivered bits per channel use: `data_fraction * N_b * (1 - SER)` while
/// the SER does not exceed `ser_th`, zero otherwise.
pub fn spectral_efficiency(ser: f64, data_fraction: f64, bits_per_symbol: usize, ser_th: f64) -> f64 {
    if ser <= ser_th {
        data_fraction * bits_per_symbol as f64 * (1.0 - ser)
    } else {
        0.0
    }
}

/// Summary of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub mode: Mode,
    pub snr_db: f64,
    pub antennas: usize,
    pub mod_order: usize,
    pub blocks: u64,
    pub ber: f64,
    /// Error rate of the amplitude bit (0 when the signal set has none).
    pub amp_ber: f64,
    pub phase_ber: f64,
    pub ser: f64,
    pub spectral_efficiency: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
}

impl MetricsRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn from_tally(
        mode: Mode,
        snr_db: f64,
        antennas: usize,
        mod_order: usize,
        tally: &Tally,
        data_fraction: f64,
        bits_per_symbol: usize,
        ser_th: f64,
    ) -> Self {
        let ser = ratio(tally.symbol_errors, tally.symbols);
        Self {
            mode,
            snr_db,
            antennas,
            mod_order,
            blocks: tally.blocks,
            ber: ratio(tally.bit_errors(), tally.bits()),
            amp_ber: ratio(tally.amp_bit_errors, tally.amp_bits),
            phase_ber: ratio(tally.phase_bit_errors, tally.phase_bits),
            ser,
            spectral_efficiency: spectral_efficiency(ser, data_fraction, bits_per_symbol, ser_th),
            bit_errors: tally.bit_errors(),
            bits: tally.bits(),
            symbol_errors: tally.symbol_errors,
            symbols: tally.symbols,
        }
    }

    /// Binomial standard error of the BER estimate.
    pub fn ber_std_err(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn se_examples() {
        assert_eq!(spectral_efficiency(0.0, 1.0, 4, 0.05), 4.0);
        assert!((spectral_efficiency(0.04, 0.5, 4, 0.05) - 1.92).abs() < 1e-12);
        assert_eq!(spectral_efficiency(0.06, 1.0, 4, 0.05), 0.0);
    }

    #[test]
    fn record_splits_amplitude_and_phase() {
        let mut t = Tally::default();
        t.record(&[1, 0, 1, 1], &[0, 0, 1, 0], 1);
        t.record(&[0, 0, 0, 0], &[0, 0, 0, 0], 1);
        assert_eq!(t.symbols, 2);
        assert_eq!(t.symbol_errors, 1);
        assert_eq!((t.amp_bit_errors, t.phase_bit_errors), (1, 1));
        assert_eq!((t.amp_bits, t.phase_bits), (2, 6));
        assert_eq!(t.bit_errors(), 2);
        let r = MetricsRecord::from_tally(Mode::DifferentialOnebit, 5.0, 8, 16, &t, 1.0, 4, 0.05);
        assert_eq!(r.ber, 0.25);
        assert_eq!(r.amp_ber, 0.5);
        assert_eq!(r.ser, 0.5);
        assert_eq!(r.spectral_efficiency, 0.0);
    }

    #[test]
    fn empty_tally_has_zero_rates() {
        let r = MetricsRecord::from_tally(Mode::Coherent, 0.0, 1, 16, &Tally::default(), 0.5, 4, 0.05);
        assert_eq!((r.ber, r.ser, r.blocks), (0.0, 0.0, 0));
    }
}
