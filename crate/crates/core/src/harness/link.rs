//! One block of the differential uplink, from random bits to quantized
//! samples.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, gen_channel, ChannelConfig};
use crate::error::Result;
use crate::modem::{dapsk_encode, BitBlock, ConstellationSpec, EncoderState};
use crate::quantize::QuantizerSpec;

/// Independent generator for `(seed, stream)`. Streams keep blocks
/// reproducible regardless of the order they are simulated in.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of block `block` at grid point `point`.
pub fn block_stream(point: usize, block: usize) -> u64 {
    ((point as u64) << 40) | block as u64
}

#[derive(Debug, Clone)]
pub struct DifferentialBlock {
    /// `bits[v - 1]` is carried by use `v`; use 0 is the reference symbol.
    pub bits: Vec<BitBlock>,
    pub symbols: Vec<Complex64>,
    /// `U x N` quantized samples.
    pub q: Array2<Complex64>,
}

/// Sends a reference symbol followed by `N - 1` random data symbols.
pub fn transmit_differential<R: Rng + ?Sized>(
    spec: &ConstellationSpec,
    qspec: &QuantizerSpec,
    channel: &ChannelConfig,
    rng: &mut R,
) -> Result<DifferentialBlock> {
    let n = channel.uses();
    let bits: Vec<BitBlock> = (1..n).map(|_| BitBlock::random(spec.bits_per_symbol(), rng)).collect();
    let start = EncoderState::default();
    let mut symbols = Vec::with_capacity(n);
    symbols.push(start.symbol(spec));
    symbols.extend(dapsk_encode(&bits, spec, start)?.0);
    let ch = gen_channel(channel, rng);
    let y = apply_channel(&symbols, &ch, channel.sigma_z2(), rng)?;
    let q = qspec.quantize(&y)?;
    Ok(DifferentialBlock { bits, symbols, q })
}

/// Column `v` of a sample matrix as a contiguous vector.
pub fn column(q: &Array2<Complex64>, v: usize) -> Vec<Complex64> {
    q.column(v).to_vec()
}

/// High bit set on streams used for training data, so they never coincide
/// with evaluation blocks drawn from the same seed.
pub const DATASET_STREAM: u64 = 1 << 63;
