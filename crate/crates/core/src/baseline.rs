//! Pilot-aided coherent one-bit receiver used as the reference system.
//!
//! This is a representative chain, not a reproduction of any particular
//! published coherent detector: pilots on a comb of channel uses, a
//! tap-domain LMMSE channel estimate built on the Bussgang-linearized pilot
//! model, and exhaustive one-bit ML detection given the estimate.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::PowerDelayProfile;
use crate::detect::log_phi;
use crate::error::{invalid, Result};
use crate::modem::{psk_map, BitBlock, ConstellationSpec};
use crate::quantize::{sign, BussgangParams};

/// Placement of the known pilot symbols within a block of `N` uses.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan {
    uses: usize,
    positions: Vec<usize>,
    symbols: Vec<Complex64>,
    data: Vec<usize>,
}

impl PilotPlan {
    /// `ceil(xi N)` pilots.
    pub fn new(uses: usize, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(invalid(format!("pilot fraction must lie in (0, 1), got {xi}")));
        }
        Self::with_count(uses, (xi * uses as f64).ceil() as usize)
    }

    /// `count` pilots spread evenly at uses `floor(k N / count)`, carrying
    /// the unit-modulus chirp `exp(j pi k^2 / count)`.
    pub fn with_count(uses: usize, count: usize) -> Result<Self> {
        let symbols = (0..count)
            .map(|k| Complex64::from_polar(1.0, PI * (k * k) as f64 / count as f64))
            .collect();
        Self::with_symbols(uses, count, symbols)
    }

    /// Evenly spread pilots with caller-chosen symbols.
    pub fn with_symbols(uses: usize, count: usize, symbols: Vec<Complex64>) -> Result<Self> {
        if count == 0 {
            return Err(invalid("at least one pilot is required"));
        }
        if count > uses {
            return Err(invalid(format!("{count} pilots do not fit in {uses} uses")));
        }
        if symbols.len() != count {
            return Err(invalid(format!("{} pilot symbols for {count} pilots", symbols.len())));
        }
        let positions: Vec<usize> = (0..count).map(|k| k * uses / count).collect();
        let mut is_pilot = vec![false; uses];
        for &p in &positions {
            is_pilot[p] = true;
        }
        let data = (0..uses).filter(|&v| !is_pilot[v]).collect();
        Ok(Self { uses, positions, symbols, data })
    }

    pub fn uses(&self) -> usize {
        self.uses
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn data_positions(&self) -> &[usize] {
        &self.data
    }

    pub fn pilot_count(&self) -> usize {
        self.positions.len()
    }

    /// Share of the block carrying data.
    pub fn data_fraction(&self) -> f64 {
        self.data.len() as f64 / self.uses as f64
    }

    /// Transmit sequence with `data` written into the data positions.
    pub fn frame(&self, data: &[Complex64]) -> Result<Vec<Complex64>> {
        if data.len() != self.data.len() {
            return Err(invalid(format!("{} data symbols for {} data uses", data.len(), self.data.len())));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); self.uses];
        for (&p, &s) in self.positions.iter().zip(&self.symbols) {
            x[p] = s;
        }
        for (&p, &s) in self.data.iter().zip(data) {
            x[p] = s;
        }
        Ok(x)
    }
}

/// Channel estimate for every use of the block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// `U x N` estimates.
    pub h_hat: Array2<Complex64>,
    /// Per-antenna mean squared error `E|h - h_hat|^2` at each use.
    pub mse: Vec<f64>,
}

type CMatrix = DMatrix<Complex64>;

/// Second-order model of the quantized pilot observations used by the
/// LMMSE estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PilotDistortion {
    /// `q = eta y + eps` with white `eps` of variance `sigma_eps2` per use.
    White(BussgangParams),
    /// Exact covariance of sign-quantized Gaussian pilots (arcsine law):
    /// `C_q = (4/pi) (asin(Re C~) + j asin(Im C~))` where `C~` is the
    /// unit-diagonal version of `C_y`, with gain `eta = sqrt(4 / (pi d))`.
    ArcsineLaw,
}

/// LMMSE estimator for a fixed pilot plan, delay profile and noise level.
///
/// Pilot observations of one antenna are `q = eta A g + eps'` with
/// `A[k, l] = sqrt(p[l]) exp(-j 2 pi l v_k / N) p_k` and `g ~ CN(0, I)`.
/// The tap estimate is `g_hat = eta A^H C_q^-1 q` with error covariance
/// `I - eta^2 A^H C_q^-1 A`; gains at every use follow from the DFT of
/// `g_hat`. With white distortion `C_q = eta^2 A A^H + (eta^2 sigma_z^2 +
/// sigma_eps^2) I`.
#[derive(Debug, Clone)]
pub struct ChannelEstimator {
    /// `N x P` map from pilot observations to per-use gains.
    interp: CMatrix,
    mse: Vec<f64>,
    positions: Vec<usize>,
}

fn dft_row(amp: &[f64], v: usize, uses: usize) -> impl Iterator<Item = Complex64> + '_ {
    amp.iter()
        .enumerate()
        .map(move |(l, a)| Complex64::from_polar(*a, -2.0 * PI * (l * v % uses) as f64 / uses as f64))
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl ChannelEstimator {
    pub fn new(plan: &PilotPlan, pdp: &PowerDelayProfile, model: PilotDistortion, sigma_z2: f64) -> Result<Self> {
        if !(sigma_z2.is_finite() && sigma_z2 >= 0.0) {
            return Err(invalid(format!("noise variance must be >= 0, got {sigma_z2}")));
        }
        let n = plan.uses();
        let taps = pdp.taps();
        let amp: Vec<f64> = pdp.powers().iter().map(|p| p.sqrt()).collect();

        let mut a = CMatrix::zeros(plan.pilot_count(), taps);
        for (k, (&v, &p)) in plan.positions().iter().zip(plan.symbols()).enumerate() {
            for (l, w) in dft_row(&amp, v, n).enumerate() {
                a[(k, l)] = w * p;
            }
        }
        let mut c_y = &a * a.adjoint();
        for k in 0..c_y.nrows() {
            c_y[(k, k)] += sigma_z2;
        }
        let (eta, c_q) = match model {
            PilotDistortion::White(params) => {
                if !(params.eta > 0.0 && params.sigma_eps2 >= 0.0) {
                    return Err(invalid("Bussgang gain must be > 0 and distortion variance >= 0"));
                }
                let mut c_q = c_y * real(params.eta * params.eta);
                for k in 0..c_q.nrows() {
                    c_q[(k, k)] += params.sigma_eps2;
                }
                (params.eta, c_q)
            }
            PilotDistortion::ArcsineLaw => {
                let d: Vec<f64> = (0..c_y.nrows()).map(|k| c_y[(k, k)].re).collect();
                if d.iter().any(|&x| x <= 0.0) {
                    return Err(invalid("pilot observations carry no energy"));
                }
                let c_q = CMatrix::from_fn(c_y.nrows(), c_y.ncols(), |i, j| {
                    let c = c_y[(i, j)] / (d[i] * d[j]).sqrt();
                    Complex64::new(c.re.clamp(-1.0, 1.0).asin(), c.im.clamp(-1.0, 1.0).asin()) * (4.0 / PI)
                });
                // every pilot has the same power |p_k|^2 sum p[l] + sigma_z2
                let eta = (4.0 / (PI * d[0])).sqrt();
                if d.iter().any(|&x| (x - d[0]).abs() > 1e-9 * d[0]) {
                    return Err(invalid("arcsine-law model needs equal-power pilots"));
                }
                (eta, c_q)
            }
        };
        let chol =
            Cholesky::new(c_q).ok_or_else(|| invalid("pilot covariance is singular; add pilots or noise"))?;
        let ah = a.adjoint();
        // L x P tap estimator and L x L error covariance
        let weights = chol.solve(&a).adjoint() * real(eta);
        let mut cov = -(&ah * chol.solve(&a)) * real(eta * eta);
        for l in 0..taps {
            cov[(l, l)] += 1.0;
        }

        let mut b = CMatrix::zeros(n, taps);
        for v in 0..n {
            for (l, w) in dft_row(&amp, v, n).enumerate() {
                b[(v, l)] = w;
            }
        }
        let interp = &b * weights;
        let mse = (0..n)
            .map(|v| {
                let row = b.row(v);
                (row.conjugate() * &cov * row.transpose())[(0, 0)].re.max(0.0)
            })
            .collect();
        Ok(Self { interp, mse, positions: plan.positions().to_vec() })
    }

    /// Estimates every use from the pilot columns of the `U x N` matrix `q`.
    pub fn estimate(&self, q: &Array2<Complex64>) -> Result<ChannelEstimate> {
        if q.ncols() != self.interp.nrows() {
            return Err(invalid(format!("block has {} uses, estimator expects {}", q.ncols(), self.interp.nrows())));
        }
        let pilots = Array2::from_shape_fn((q.nrows(), self.positions.len()), |(u, k)| q[[u, self.positions[k]]]);
        self.estimate_from_pilots(&pilots)
    }

    /// Estimates from a `U x P` matrix of quantized pilot observations.
    pub fn estimate_from_pilots(&self, pilots: &Array2<Complex64>) -> Result<ChannelEstimate> {
        if pilots.ncols() != self.positions.len() {
            return Err(invalid(format!(
                "{} pilot observations per antenna, plan has {}",
                pilots.ncols(),
                self.positions.len()
            )));
        }
        let (n, p) = self.interp.shape();
        let mut h_hat = Array2::zeros((pilots.nrows(), n));
        for (u, obs) in pilots.outer_iter().enumerate() {
            for v in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..p {
                    acc += self.interp[(v, k)] * obs[k];
                }
                h_hat[[u, v]] = acc;
            }
        }
        Ok(ChannelEstimate { h_hat, mse: self.mse.clone() })
    }
}

/// One-shot white-distortion [`ChannelEstimator`] from `U x P` pilot
/// observations.
pub fn estimate_channel(
    pilots: &Array2<Complex64>,
    plan: &PilotPlan,
    pdp: &PowerDelayProfile,
    params: BussgangParams,
    sigma_z2: f64,
) -> Result<ChannelEstimate> {
    ChannelEstimator::new(plan, pdp, PilotDistortion::White(params), sigma_z2)?.estimate_from_pilots(pilots)
}

/// Signal set of the coherent reference with its bit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentConstellation {
    points: Vec<Complex64>,
    labels: Vec<BitBlock>,
    amplitude_bits: usize,
}

fn all_patterns(bits: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1usize << bits).map(move |i| (0..bits).map(|b| ((i >> (bits - 1 - b)) & 1) as u8).collect())
}

impl CoherentConstellation {
    /// Gray-coded `order`-PSK.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(invalid(format!("PSK order must be a power of two >= 2, got {order}")));
        }
        let bits = order.trailing_zeros() as usize;
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for pattern in all_patterns(bits) {
            points.push(psk_map(&pattern, order)?);
            labels.push(BitBlock::new(pattern)?);
        }
        Ok(Self { points, labels, amplitude_bits: 0 })
    }

    /// Two-ring APSK on the differential constellation's rings: the first
    /// bit selects `psi0`/`psi1`, the rest a Gray-coded phase.
    pub fn apsk(spec: &ConstellationSpec) -> Result<Self> {
        let mut points = Vec::with_capacity(spec.order());
        let mut labels = Vec::with_capacity(spec.order());
        for pattern in all_patterns(spec.bits_per_symbol()) {
            let amp = if pattern[0] == 0 { spec.psi0() } else { spec.psi1() };
            points.push(amp * psk_map(&pattern[1..], spec.phases())?);
            labels.push(BitBlock::new(pattern)?);
        }
        Ok(Self { points, labels, amplitude_bits: 1 })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[BitBlock] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.labels[0].len()
    }

    /// Leading bits that select the ring (0 for PSK, 1 for APSK).
    pub fn amplitude_bits(&self) -> usize {
        self.amplitude_bits
    }

    pub fn index_of(&self, bits: &BitBlock) -> Option<usize> {
        self.labels.iter().position(|l| l == bits)
    }
}

/// ML symbol index given the channel estimate:
///
/// `argmax_x sum_{u,i} ln Phi(sqrt(rho_x) sign(q_{R,u,i}) h_hat_{R,u,i}^T x_R)`
///
/// where `h_hat_{R,u,1} = [Re h, -Im h]`, `h_hat_{R,u,2} = [Im h, Re h]` and
/// `rho_x = 2 / (sigma_z2 + |x|^2 mse)` accounts for the estimation error.
/// Ties go to the lowest index.
pub fn coherent_detect(
    q: &[Complex64],
    h_hat: &[Complex64],
    set: &CoherentConstellation,
    sigma_z2: f64,
    mse: f64,
) -> Result<usize> {
    if q.len() != h_hat.len() {
        return Err(invalid(format!("{} observations but {} channel estimates", q.len(), h_hat.len())));
    }
    if !(sigma_z2 >= 0.0 && mse >= 0.0 && sigma_z2 + mse > 0.0) {
        return Err(invalid("noise variance plus estimation error must be > 0"));
    }
    // fold the observed signs into the estimate once
    let adj: Vec<(Complex64, Complex64)> = q
        .iter()
        .zip(h_hat)
        .map(|(q, h)| {
            let (s1, s2) = (sign(q.re), sign(q.im));
            (Complex64::new(s1 * h.re, -s1 * h.im), Complex64::new(s2 * h.im, s2 * h.re))
        })
        .collect();
    let mut best = 0;
    let mut best_ll = f64::NEG_INFINITY;
    for (k, x) in set.points.iter().enumerate() {
        let scale = (2.0 / (sigma_z2 + x.norm_sqr() * mse)).sqrt();
        let (xr, xi) = (scale * x.re, scale * x.im);
        let ll: f64 = adj
            .iter()
            .map(|(r1, r2)| log_phi(r1.re * xr + r1.im * xi) + log_phi(r2.re * xr + r2.im * xi))
            .sum();
        if ll > best_ll {
            best_ll = ll;
            best = k;
        }
    }
    Ok(best)
}
