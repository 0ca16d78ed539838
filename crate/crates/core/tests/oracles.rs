//! Numerical building blocks against independent reference computations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use onebit_dapsk::channel::{apply_channel, complex_normal, gen_channel, ChannelConfig, PowerDelayProfile};
use onebit_dapsk::detect::bessel::ln_bessel_i;
use onebit_dapsk::detect::{energy_statistic, log_phi};
use onebit_dapsk::harness::{read_csv, write_csv, MetricsRecord, Mode, Tally, CSV_HEADER};
use onebit_dapsk::neural::{load_model, save_model, MlpModel};
use onebit_dapsk::quantize::{bussgang_params, sign_quantize};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + inner + f(b)) * h / 3.0
}

#[test]
fn log_phi_matches_erfc() {
    let mut x = -35.0;
    while x <= 8.0 {
        let reference = (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln();
        let got = log_phi(x);
        // statrs erfc itself is only good to about 1e-10 relative
        assert!((got - reference).abs() <= 1e-9 * reference.abs().max(1e-3), "x = {x}: {got} vs {reference}");
        x += 0.173;
    }
}

#[test]
fn bessel_matches_integral_representation() {
    // I_nu(x) = (1/pi) int_0^pi exp(x cos t) cos(nu t) dt, scaled by exp(-x)
    for nu in [0u32, 1, 3, 7, 12] {
        for x in [0.1, 1.0, 5.0, 20.0, 60.0] {
            let scaled = simpson(|t| (x * (t.cos() - 1.0)).exp() * (nu as f64 * t).cos(), 0.0, std::f64::consts::PI, 20_000)
                / std::f64::consts::PI;
            if scaled < 1e-6 {
                // the quadrature cancels too much to serve as a reference here
                continue;
            }
            let reference = scaled.ln() + x;
            let got = ln_bessel_i(nu, x);
            assert!((got - reference).abs() < 1e-8 * reference.abs().max(1.0), "nu = {nu}, x = {x}: {got} vs {reference}");
        }
    }
}

#[test]
fn bessel_satisfies_the_order_recurrence() {
    // I_{nu-1}(x) - I_{nu+1}(x) = (2 nu / x) I_nu(x), across the expansion switch
    for nu in [5u32, 28, 29, 30, 31, 64, 95, 191] {
        for x in [0.5, 10.0, 90.0, 400.0, 3000.0] {
            let (lm, l0, lp) = (ln_bessel_i(nu - 1, x), ln_bessel_i(nu, x), ln_bessel_i(nu + 1, x));
            let lhs = (lm - l0).exp() - (lp - l0).exp();
            let rhs = 2.0 * nu as f64 / x;
            assert!((lhs - rhs).abs() < 1e-7 * rhs.max(1.0), "nu = {nu}, x = {x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn bussgang_distortion_is_uncorrelated_with_input() {
    let n = 1_000_000;
    for var in [0.5, 1.0, 3.0] {
        let p = bussgang_params(var).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let terms: Vec<Complex64> = (0..n)
            .map(|_| {
                let y = complex_normal(&mut rng, 2.0 * var);
                (sign_quantize(y) - p.eta * y) * y.conj()
            })
            .collect();
        let mean = terms.iter().sum::<Complex64>() / n as f64;
        let var_re = terms.iter().map(|t| (t.re - mean.re).powi(2)).sum::<f64>() / n as f64;
        let se = (var_re / n as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * se, "component variance {var}: mean {mean}, se {se}");
        let eps = (0..n)
            .map(|_| {
                let y = complex_normal(&mut rng, 2.0 * var);
                (sign_quantize(y) - p.eta * y).norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((eps - p.sigma_eps2).abs() < 5e-3, "{eps} vs {}", p.sigma_eps2);
    }
}

#[test]
fn channel_statistics() {
    let uses = 64;
    let pdp = PowerDelayProfile::exponential(31, 0.5).unwrap();
    let expected = pdp.adjacent_correlation(uses);
    let sigma_z2 = 0.1;
    let cfg = ChannelConfig::new(16, uses, pdp, sigma_z2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Complex64> = (0..uses).map(|v| Complex64::from_polar(1.0, v as f64)).collect();
    let (mut power, mut corr, mut rx, mut count) = (0.0, Complex64::new(0.0, 0.0), 0.0, 0.0);
    for _ in 0..2000 {
        let ch = gen_channel(&cfg, &mut rng);
        let y = apply_channel(&x, &ch, sigma_z2, &mut rng).unwrap();
        for u in 0..16 {
            for v in 1..uses {
                power += ch.gains[[u, v]].norm_sqr();
                corr += ch.gains[[u, v]] * ch.gains[[u, v - 1]].conj();
                rx += y[[u, v]].norm_sqr();
                count += 1.0;
            }
        }
    }
    assert!((power / count - 1.0).abs() < 0.02);
    assert!((corr / count - expected).norm() < 0.02, "{} vs {expected}", corr / count);
    assert!((rx / count - (1.0 + sigma_z2)).abs() < 0.02);
}

#[test]
fn energy_statistic_concentrates_like_inverse_root_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spread = |u: usize, rng: &mut ChaCha8Rng| {
        let vals: Vec<f64> = (0..4000)
            .map(|_| {
                let q: Vec<Complex64> = (0..u).map(|_| complex_normal(rng, 1.0)).collect();
                energy_statistic(&q).unwrap().lambda[0]
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
    };
    let ratio = spread(16, &mut rng) / spread(64, &mut rng);
    assert!((ratio - 2.0).abs() < 0.15, "spread ratio {ratio}");
}

#[test]
fn model_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut model = MlpModel::new(10, &[16, 8], 2, &mut rng).unwrap();
    model.snr_grid_db = vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0];
    let path = dir.path().join("m.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);
    let x: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
    assert_eq!(back.forward(&x).unwrap(), model.forward(&x).unwrap());
    assert!(load_model(&dir.path().join("missing.json")).is_err());
}

#[test]
fn csv_roundtrip_keeps_columns_and_values() {
    let tally = Tally {
        blocks: 10,
        symbols: 2550,
        symbol_errors: 17,
        amp_bits: 2550,
        amp_bit_errors: 5,
        phase_bits: 7650,
        phase_bit_errors: 13,
    };
    let rec = MetricsRecord::from_tally(Mode::DifferentialVqlLrt, 12.5, 96, 16, &tally, 1.0, 4, 0.05);
    let mut buf = Vec::new();
    write_csv(std::slice::from_ref(&rec), &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(&path, buf).unwrap();
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].mode, "differential-vql-lrt");
    assert_eq!(rows[0].antennas, 96);
    assert_eq!(rows[0].ber, rec.ber);
    assert_eq!(rows[0].se, rec.spectral_efficiency);
}
