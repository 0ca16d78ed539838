//! Complex-to-real rewriting of the differential one-bit model.
//!
//! Writing `q[v] ~ a' s q[v-1]` per real component gives
//! `q_R,u,i[v] ~ a' f_R,u,i^T s_R` with rows
//! `f_1 = [Re q[v-1], -Im q[v-1]]` and `f_2 = [Im q[v-1], Re q[v-1]]`.
//! Multiplying row `i` by `sign(q_R,u,i[v])` turns every observed sign into
//! the event `a' sqrt(rho) f~_i^T s_R >= -w`, so the likelihood becomes a
//! single product of normal CDFs.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quantize::sign;

/// Per-antenna real-domain view of two consecutive quantized uses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealFrame {
    /// `[Re q_u[v], Im q_u[v]]` for each antenna.
    pub q_r: Vec<[f64; 2]>,
    /// Sign-adjusted previous-use matrices, one `[row1, row2]` per antenna.
    pub f_tilde: Vec<[[f64; 2]; 2]>,
}

impl RealFrame {
    pub fn antennas(&self) -> usize {
        self.q_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_r.is_empty()
    }

    /// All sign-adjusted rows, two per antenna.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.f_tilde.iter().flat_map(|m| m.iter().copied())
    }
}

/// Rows of the real matrix that applies multiplication by `q_prev`.
#[inline]
pub fn prev_rows(q_prev: Complex64) -> [[f64; 2]; 2] {
    [[q_prev.re, -q_prev.im], [q_prev.im, q_prev.re]]
}

/// Sign-adjusted rows for one antenna.
#[inline]
pub fn adjusted_rows(q_now: Complex64, q_prev: Complex64) -> [[f64; 2]; 2] {
    let [f1, f2] = prev_rows(q_prev);
    let s1 = sign(q_now.re);
    let s2 = sign(q_now.im);
    [[s1 * f1[0], s1 * f1[1]], [s2 * f2[0], s2 * f2[1]]]
}

pub fn realify(q_now: &[Complex64], q_prev: &[Complex64]) -> Result<RealFrame> {
    if q_now.len() != q_prev.len() {
        return Err(invalid(format!(
            "current frame has {} antennas, previous has {}",
            q_now.len(),
            q_prev.len()
        )));
    }
    Ok(RealFrame {
        q_r: q_now.iter().map(|q| [q.re, q.im]).collect(),
        f_tilde: q_now.iter().zip(q_prev).map(|(&n, &p)| adjusted_rows(n, p)).collect(),
    })
}
