//! Maximum-likelihood differential detection from sign-quantized samples.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::normal::log_phi;
use super::realify::{adjusted_rows, RealFrame};
use crate::channel::{diff_noise_var, RingStep};
use crate::error::{invalid, Result};
use crate::modem::ConstellationSpec;
use crate::quantize::{combined_noise_var, BussgangParams};

/// One hypothesis `(a', s)` of the joint search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub step: RingStep,
    pub a_prime: f64,
    pub phase_index: usize,
    /// `[Re s, Im s]`, unit norm.
    pub s_r: [f64; 2],
}

impl Candidate {
    pub fn rotation(&self) -> Complex64 {
        Complex64::new(self.s_r[0], self.s_r[1])
    }

    /// `b1 = 0` exactly when `|a' s| = 1`.
    pub fn amplitude_bit(&self) -> u8 {
        if ((self.a_prime * self.rotation()).norm() - 1.0).abs() <= 1e-9 {
            0
        } else {
            1
        }
    }
}

fn unit_phase(k: usize, m: usize) -> [f64; 2] {
    let (sin, cos) = (2.0 * PI * k as f64 / m as f64).sin_cos();
    [cos, sin]
}

/// The `3M` candidates, enumerated ratio-major in the order
/// `a' = 1, psi0/psi1, psi1/psi0` and phase index within each ratio.
pub fn candidate_set(spec: &ConstellationSpec) -> Vec<Candidate> {
    let m = spec.phases();
    RingStep::ALL
        .iter()
        .flat_map(|&step| {
            (0..m).map(move |k| Candidate {
                step,
                a_prime: step.amplitude_ratio(spec.ring_ratio()),
                phase_index: k,
                s_r: unit_phase(k, m),
            })
        })
        .collect()
}

/// Effective SNR `rho = 1 / rho_{z,eps}` for each ring hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoTable {
    pub keep: f64,
    pub outer_to_inner: f64,
    pub inner_to_outer: f64,
}

impl RhoTable {
    pub fn uniform(rho: f64) -> Self {
        Self { keep: rho, outer_to_inner: rho, inner_to_outer: rho }
    }

    /// Reciprocal of the combined thermal and quantization noise variance.
    pub fn from_noise(params: BussgangParams, sigma_z2: f64, ring_ratio: f64) -> Self {
        let rho = |step| {
            let rho_z = diff_noise_var(step, sigma_z2, ring_ratio);
            1.0 / combined_noise_var(params, step, rho_z, ring_ratio)
        };
        Self {
            keep: rho(RingStep::Keep),
            outer_to_inner: rho(RingStep::OuterToInner),
            inner_to_outer: rho(RingStep::InnerToOuter),
        }
    }

    pub fn get(&self, step: RingStep) -> f64 {
        match step {
            RingStep::Keep => self.keep,
            RingStep::OuterToInner => self.outer_to_inner,
            RingStep::InnerToOuter => self.inner_to_outer,
        }
    }
}

/// `sum_i sum_u ln Phi(a' sqrt(rho) f~_{u,i}^T s_R)`, evaluated term by term.
pub fn onebit_loglik(frame: &RealFrame, cand: &Candidate, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid(format!("rho must be finite and > 0, got {rho}")));
    }
    if !(cand.a_prime.is_finite() && cand.s_r.iter().all(|x| x.is_finite())) {
        return Err(invalid("candidate must be finite"));
    }
    let scale = cand.a_prime * rho.sqrt();
    let mut acc = 0.0;
    for row in frame.rows() {
        let t = row[0] * cand.s_r[0] + row[1] * cand.s_r[1];
        if !t.is_finite() {
            return Err(invalid("frame contains non-finite entries"));
        }
        acc += log_phi(scale * t);
    }
    Ok(acc)
}

/// Multiset of sign-adjusted rows. With sign labels there are at most four
/// distinct rows, so the likelihood of every candidate costs a handful of
/// `ln Phi` evaluations regardless of the antenna count. Rows are kept in a
/// canonical order so the sum does not depend on antenna ordering.
#[derive(Debug, Clone, Default)]
struct RowHistogram {
    rows: Vec<([f64; 2], f64)>,
}

impl RowHistogram {
    fn push(&mut self, row: [f64; 2]) {
        match self.rows.iter_mut().find(|(r, _)| *r == row) {
            Some((_, count)) => *count += 1.0,
            None => self.rows.push((row, 1.0)),
        }
    }

    fn finish(mut self) -> Self {
        self.rows.sort_by(|(a, _), (b, _)| {
            a[0].total_cmp(&b[0]).then_with(|| a[1].total_cmp(&b[1]))
        });
        self
    }

    fn loglik(&self, cand: &Candidate, rho: f64) -> f64 {
        let scale = cand.a_prime * rho.sqrt();
        self.rows
            .iter()
            .map(|(row, count)| count * log_phi(scale * (row[0] * cand.s_r[0] + row[1] * cand.s_r[1])))
            .sum()
    }
}

fn histogram<'a>(pairs: impl Iterator<Item = (&'a Complex64, &'a Complex64)>) -> Result<RowHistogram> {
    let mut h = RowHistogram::default();
    for (now, prev) in pairs {
        if !(now.re.is_finite() && now.im.is_finite() && prev.re.is_finite() && prev.im.is_finite()) {
            return Err(invalid("quantized frame contains non-finite entries"));
        }
        for row in adjusted_rows(*now, *prev) {
            h.push(row);
        }
    }
    Ok(h.finish())
}

fn argmax<'a>(
    cands: impl Iterator<Item = &'a Candidate>,
    mut score: impl FnMut(&Candidate) -> f64,
) -> Option<Candidate> {
    let mut best: Option<(Candidate, f64)> = None;
    for c in cands {
        let s = score(c);
        // strict comparison keeps the lowest index on ties
        let better = match &best {
            None => true,
            Some((_, b)) => s.partial_cmp(b) == Some(Ordering::Greater),
        };
        if better {
            best = Some((*c, s));
        }
    }
    best.map(|(c, _)| c)
}

/// Output of a differential detector for one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub candidate: Candidate,
    pub amplitude_bit: u8,
}

impl Detection {
    pub fn rotation(&self) -> Complex64 {
        self.candidate.rotation()
    }
}

/// Joint ML search over all `3M` amplitude-ratio/phase hypotheses.
pub fn onebit_ml_detect(
    q_now: &[Complex64],
    q_prev: &[Complex64],
    spec: &ConstellationSpec,
    rho: &RhoTable,
) -> Result<Detection> {
    if q_now.len() != q_prev.len() {
        return Err(invalid(format!(
            "current frame has {} antennas, previous has {}",
            q_now.len(),
            q_prev.len()
        )));
    }
    let h = histogram(q_now.iter().zip(q_prev))?;
    let cands = candidate_set(spec);
    let best = argmax(cands.iter(), |c| h.loglik(c, rho.get(c.step))).expect("candidate set is non-empty");
    Ok(Detection { candidate: best, amplitude_bit: best.amplitude_bit() })
}

/// ML phase detection with `a' = 1` restricted to the sign-quantized
/// antennas in `antennas`. Returns the winning candidate.
pub fn vql_phase_detect(
    q_now: &[Complex64],
    q_prev: &[Complex64],
    antennas: &[usize],
    spec: &ConstellationSpec,
    rho: f64,
) -> Result<Candidate> {
    if antennas.is_empty() {
        return Err(invalid("phase detection needs at least one sign-quantized antenna"));
    }
    if q_now.len() != q_prev.len() {
        return Err(invalid("current and previous frames differ in length"));
    }
    if let Some(&u) = antennas.iter().find(|&&u| u >= q_now.len()) {
        return Err(invalid(format!("antenna index {u} out of range")));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid(format!("rho must be finite and > 0, got {rho}")));
    }
    let h = histogram(antennas.iter().map(|&u| (&q_now[u], &q_prev[u])))?;
    let cands = candidate_set(spec);
    let phases = &cands[..spec.phases()];
    Ok(argmax(phases.iter(), |c| h.loglik(c, rho)).expect("phase set is non-empty"))
}
