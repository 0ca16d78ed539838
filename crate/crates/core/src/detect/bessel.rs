//! `ln I_nu(x)` for the modified Bessel function of the first kind and
//! integer order.
//!
//! Low orders use the power series summed outward from its largest term, so
//! nothing overflows even for large `x`. Orders at or above
//! [`DEBYE_MIN_ORDER`] use Debye's uniform asymptotic expansion with four
//! correction terms.

use std::f64::consts::PI;

/// Smallest order handed to the uniform asymptotic expansion.
pub const DEBYE_MIN_ORDER: u32 = 30;

const SERIES_TOL: f64 = 1e-17;

/// `ln I_nu(x)` for `x >= 0`. Returns `-inf` for `x = 0, nu > 0`.
pub fn ln_bessel_i(nu: u32, x: f64) -> f64 {
    assert!(x >= 0.0 && !x.is_nan(), "ln_bessel_i needs x >= 0, got {x}");
    if x == 0.0 {
        return if nu == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if nu >= DEBYE_MIN_ORDER {
        ln_bessel_i_debye(nu, x)
    } else {
        ln_bessel_i_series(nu, x)
    }
}

/// Power series `sum_k (x/2)^(2k+nu) / (k! (k+nu)!)`.
pub fn ln_bessel_i_series(nu: u32, x: f64) -> f64 {
    let nu_f = nu as f64;
    let half = 0.5 * x;
    let q = half * half;
    // index of the largest term
    let peak = (0.5 * ((nu_f * nu_f + x * x).sqrt() - nu_f)).floor().max(0.0);
    let ln_peak = (2.0 * peak + nu_f) * half.ln() - libm::lgamma(peak + 1.0) - libm::lgamma(peak + nu_f + 1.0);

    let mut sum = 1.0;
    // upward
    let mut term = 1.0;
    let mut k = peak;
    loop {
        term *= q / ((k + 1.0) * (k + nu_f + 1.0));
        sum += term;
        k += 1.0;
        if term < SERIES_TOL * sum {
            break;
        }
    }
    // downward
    let mut term = 1.0;
    let mut k = peak;
    while k > 0.0 {
        term *= k * (k + nu_f) / q;
        sum += term;
        k -= 1.0;
        if term < SERIES_TOL * sum {
            break;
        }
    }
    ln_peak + sum.ln()
}

/// Debye expansion of `I_nu(nu z)` with `z = x / nu`.
pub fn ln_bessel_i_debye(nu: u32, x: f64) -> f64 {
    let n = nu as f64;
    let z = x / n;
    let root = (1.0 + z * z).sqrt();
    let t = 1.0 / root;
    let eta = root + (z / (1.0 + root)).ln();

    let t2 = t * t;
    let u1 = t * (3.0 - 5.0 * t2) / 24.0;
    let u2 = t2 * (81.0 - 462.0 * t2 + 385.0 * t2 * t2) / 1152.0;
    let u3 = t * t2 * (30375.0 - 369603.0 * t2 + 765765.0 * t2 * t2 - 425425.0 * t2 * t2 * t2) / 414720.0;
    let u4 = t2
        * t2
        * (4465125.0 - 94121676.0 * t2 + 349922430.0 * t2 * t2 - 446185740.0 * t2 * t2 * t2
            + 185910725.0 * t2 * t2 * t2 * t2)
        / 39813120.0;
    let corr = 1.0 + u1 / n + u2 / (n * n) + u3 / (n * n * n) + u4 / (n * n * n * n);

    n * eta - 0.5 * (2.0 * PI * n).ln() - 0.5 * root.ln() + corr.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // I_0(1), I_1(1), I_2(5)
        assert!((ln_bessel_i(0, 1.0) - 1.266_065_877_752_008_4f64.ln()).abs() < 1e-14);
        assert!((ln_bessel_i(1, 1.0) - 0.565_159_103_992_485_1f64.ln()).abs() < 1e-14);
        assert!((ln_bessel_i(2, 5.0) - 17.505_614_966_624_236f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn zero_argument() {
        assert_eq!(ln_bessel_i(0, 0.0), 0.0);
        assert_eq!(ln_bessel_i(3, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn series_and_debye_agree_in_overlap() {
        for nu in [30u32, 40, 60, 100, 255, 511] {
            for x in [0.5, 5.0, 30.0, 100.0, 700.0, 3000.0] {
                let a = ln_bessel_i_series(nu, x);
                let b = ln_bessel_i_debye(nu, x);
                assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "nu={nu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn recurrence_holds() {
        // I_{n-1}(x) - I_{n+1}(x) = (2n/x) I_n(x)
        for n in [1u32, 5, 29, 30, 31, 80] {
            for x in [0.7, 12.0, 90.0] {
                let lm = ln_bessel_i(n - 1, x);
                let l0 = ln_bessel_i(n, x);
                let lp = ln_bessel_i(n + 1, x);
                let lhs = (lm - l0).exp() - (lp - l0).exp();
                let rhs = 2.0 * n as f64 / x;
                assert!((lhs - rhs).abs() < 1e-7 * rhs, "n={n} x={x}");
            }
        }
    }
}
