//! Monte-Carlo and quadrature reference values printed by the `oracle`
//! subcommand.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use crate::channel::{complex_normal, gen_channel};
use crate::detect::{ncx2_pdf, Ncx2Params};
use crate::error::Result;
use crate::quantize::{bussgang_params, sign_quantize};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleLine {
    pub name: String,
    pub estimate: f64,
    /// Closed-form value the estimate is compared with.
    pub closed_form: f64,
}

impl OracleLine {
    fn new(name: impl Into<String>, estimate: f64, closed_form: f64) -> Self {
        Self { name: name.into(), estimate, closed_form }
    }
}

/// Empirical `(eta, sigma_eps2)` of the sign quantizer for complex Gaussian
/// input with variance `input_var`: `eta = Re E[q y*] / E|y|^2` and
/// `sigma_eps2 = E|q - eta y|^2`.
pub fn bussgang_monte_carlo(input_var: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<Complex64> = (0..samples).map(|_| complex_normal(&mut rng, input_var)).collect();
    let (cross, power) = ys.iter().fold((0.0, 0.0), |(c, p), y| (c + (sign_quantize(*y) * y.conj()).re, p + y.norm_sqr()));
    let eta = cross / power;
    let eps = ys.iter().map(|y| (sign_quantize(*y) - eta * y).norm_sqr()).sum::<f64>() / samples as f64;
    (eta, eps)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// `(integral, mean)` of the energy density by quadrature.
pub fn ncx2_moments(p: &Ncx2Params) -> Result<(f64, f64)> {
    ncx2_pdf(p.mean(), p)?;
    let pdf = |x: f64| ncx2_pdf(x, p).unwrap_or(0.0);
    // the density is concentrated within a few standard deviations of the mean
    let hi = p.mean() * 6.0 + 10.0 * p.sigma_tilde2;
    let mass = integrate(&pdf, 0.0, hi, 1e-10);
    let mean = integrate(&|x| x * pdf(x), 0.0, hi, 1e-10);
    Ok((mass, mean))
}

pub fn run_oracles(cfg: &SimConfig, seed: u64) -> Result<Vec<OracleLine>> {
    let mut out = Vec::new();
    for (label, var) in [("complex unit variance", 1.0), ("unit variance per component", 2.0)] {
        let (eta, eps) = bussgang_monte_carlo(var, 1_000_000, seed);
        let exact = bussgang_params(var / 2.0)?;
        out.push(OracleLine::new(format!("bussgang eta, {label}"), eta, exact.eta));
        out.push(OracleLine::new(format!("bussgang sigma_eps2, {label}"), eps, exact.sigma_eps2));
    }

    let ch_cfg = cfg.channel(cfg.snr_db.first().copied().unwrap_or(10.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut power, mut corr, mut count) = (0.0, Complex64::new(0.0, 0.0), 0usize);
    for _ in 0..2000 {
        let ch = gen_channel(&ch_cfg, &mut rng);
        for u in 0..ch.antennas() {
            for v in 1..ch.uses() {
                power += ch.gains[[u, v]].norm_sqr();
                corr += ch.gains[[u, v]] * ch.gains[[u, v - 1]].conj();
                count += 1;
            }
        }
    }
    let expected = ch_cfg.pdp().adjacent_correlation(ch_cfg.uses());
    out.push(OracleLine::new("channel mean |h|^2", power / count as f64, 1.0));
    out.push(OracleLine::new("channel Re E[h[v] h*[v-1]]", corr.re / count as f64, expected.re));
    out.push(OracleLine::new("channel arg E[h[v] h*[v-1]] (rad)", corr.arg(), expected.arg()));

    for u in [8usize, 32] {
        let p = Ncx2Params { antennas: u, alpha: 1.0, x_tilde: 1.264_911, eta: 0.8, sigma_tilde2: 0.7 };
        let (mass, mean) = ncx2_moments(&p)?;
        out.push(OracleLine::new(format!("energy density mass, U={u}"), mass, 1.0));
        out.push(OracleLine::new(format!("energy density mean, U={u}"), mean, p.mean()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomials_and_gaussians() {
        assert!((integrate(&|x| x * x, 0.0, 3.0, 1e-12) - 9.0).abs() < 1e-10);
        let g = integrate(&|x| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }
}
