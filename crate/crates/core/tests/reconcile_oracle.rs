//! Virtual-channel statistics of the reconciliation against independent
//! numerical integrals.
//!
//! With `x ~ N(0, 1)` and `y = x + n`, the rotated block of Alice is
//! `‖y‖ u / (1+σ²)` plus white noise of variance `σ²/(1+σ²)`, so a coordinate
//! flips sign with probability `Q(R sqrt(snr/8))` where `R` is chi-distributed
//! with 8 degrees of freedom.

use rand::Rng;
use rlldpc::channel::{awgn, gaussian_source};
use rlldpc::reconcile::{reconcile_receive_with_norms, reconcile_transmit, relative_norms};
use rlldpc::rng::rng_from_seed;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn gaussian_tail(z: f64) -> f64 {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 - simpson(phi, 0.0, z, 200)
}

/// `E[Q(R sqrt(snr/8))]` with `R ~ chi(8)`, density `r^7 exp(-r²/2) / 48`.
fn expected_ber(snr: f64) -> f64 {
    let k = (snr / 8.0).sqrt();
    simpson(|r| r.powi(7) * (-0.5 * r * r).exp() / 48.0 * gaussian_tail(r * k), 0.0, 12.0, 2000)
}

fn frame(n: usize, snr: f64, seed: u64) -> (Vec<u8>, Vec<f64>) {
    let x = gaussian_source(n, 1.0, seed).unwrap();
    let y = awgn(&x, snr, seed + 1).unwrap();
    let mut rng = rng_from_seed(seed + 2);
    let key: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let (maps, norms) = reconcile_transmit(&y, &key).unwrap();
    let llrs = reconcile_receive_with_norms(&x, &maps, &relative_norms(&norms).unwrap(), snr).unwrap();
    (key, llrs)
}

#[test]
fn chi_mixture_oracle_sanity() {
    // small snr: the mixture stays close to Q(sqrt(snr))
    let snr = 0.0226;
    assert!((expected_ber(snr) / gaussian_tail(snr.sqrt()) - 1.0).abs() < 0.05);
    let q1 = gaussian_tail(1.0);
    assert!((q1 - 0.158_655_253_931_457_05).abs() < 1e-10, "{q1}");
}

#[test]
fn sign_error_rate_matches_chi_mixture() {
    for (snr, seed) in [(0.0226, 10), (1.0, 20)] {
        let n = 800_000; // 10^5 blocks
        let (key, llrs) = frame(n, snr, seed);
        let errors = llrs.iter().zip(&key).filter(|(l, &k)| (**l < 0.0) as u8 != k).count();
        let ber = errors as f64 / n as f64;
        let expected = expected_ber(snr);
        // about five standard errors
        let tol = 5.0 * (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((ber - expected).abs() < tol, "snr {snr}: ber {ber}, expected {expected}");
    }
}

#[test]
fn llrs_are_consistent() {
    // E[(1 - 2b) | L] = tanh(L/2) for a calibrated LLR
    for (snr, seed) in [(0.0226, 30), (0.5, 40)] {
        let n = 800_000;
        let (key, llrs) = frame(n, snr, seed);
        let (mut lhs, mut rhs, mut sq) = (0.0, 0.0, 0.0);
        for (l, &b) in llrs.iter().zip(&key) {
            let t = (0.5 * l).tanh();
            let s = if b == 0 { 1.0 } else { -1.0 };
            lhs += s * t;
            rhs += t * t;
            sq += t * t * (1.0 - t * t);
        }
        let (lhs, rhs) = (lhs / n as f64, rhs / n as f64);
        let tol = 5.0 * (sq / n as f64).sqrt() / (n as f64).sqrt() + 1e-4 * rhs;
        assert!((lhs - rhs).abs() < tol, "snr {snr}: {lhs} vs {rhs} (tol {tol})");
    }
}
