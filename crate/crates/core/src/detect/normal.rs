//! Standard normal CDF in the log domain.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Below this point `erfc(-x / sqrt 2)` would underflow into subnormals, so
/// the asymptotic tail series takes over.
const TAIL_SWITCH: f64 = -37.0;

/// `ln Phi(x)` for the standard normal CDF `Phi`.
///
/// Finite for every finite `x`; for `x < -37` the Mills-ratio expansion
/// `ln Phi(x) ~ -x^2/2 - ln(-x) - ln(2 pi)/2 + ln(1 - 1/x^2 + 3/x^4 - ...)`
/// is used.
pub fn log_phi(x: f64) -> f64 {
    if x >= 0.0 {
        (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x >= TAIL_SWITCH {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        -0.5 * x * x - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// `Phi(x)`.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
