//! Gaussian source, AWGN channel, SNR estimation and the fiber link model.
//!
//! All variances are in shot-noise units.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Returned by [`estimate_snr`] when the residual noise is exactly zero.
pub const SNR_CAP: f64 = 1e12;

/// Minimum sample count accepted by [`estimate_snr`].
pub const MIN_ESTIMATION_SAMPLES: usize = 1000;

/// Fiber link and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub distance_km: f64,
    pub loss_db_per_km: f64,
    /// η
    pub detector_efficiency: f64,
    /// ξ, referred to the channel input.
    pub excess_noise: f64,
    /// v_el
    pub electronic_noise: f64,
    /// V_A
    pub modulation_variance: f64,
}

impl ChannelParams {
    /// Standard single-mode fiber with the trusted homodyne detector used for
    /// the key-rate curves: ξ = 0.01, η = 0.6, v_el = 0.015, 0.2 dB/km.
    pub fn standard(distance_km: f64, modulation_variance: f64) -> Self {
        Self {
            distance_km,
            loss_db_per_km: 0.2,
            detector_efficiency: 0.6,
            excess_noise: 0.01,
            electronic_noise: 0.015,
            modulation_variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and non-negative, got {v}")))
            }
        };
        finite_nonneg("distance_km", self.distance_km)?;
        finite_nonneg("loss_db_per_km", self.loss_db_per_km)?;
        finite_nonneg("excess_noise", self.excess_noise)?;
        finite_nonneg("electronic_noise", self.electronic_noise)?;
        finite_nonneg("modulation_variance", self.modulation_variance)?;
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(Error::invalid(format!(
                "detector_efficiency must lie in (0, 1], got {}",
                self.detector_efficiency
            )));
        }
        Ok(())
    }

    /// T = 10^(-loss·d/10).
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.loss_db_per_km * self.distance_km / 10.0)
    }
}

/// `n` i.i.d. zero-mean Gaussian samples of the given variance.
pub fn gaussian_source(n: usize, variance: f64, seed: u64) -> Result<Vec<f64>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::invalid(format!("variance must be positive, got {variance}")));
    }
    let sd = variance.sqrt();
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// `y = x + n` with noise variance `var(x) / snr`.
pub fn awgn(x: &[f64], snr: f64, seed: u64) -> Result<Vec<f64>> {
    if !(snr > 0.0) || snr.is_nan() {
        return Err(Error::invalid(format!("snr must be positive, got {snr}")));
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let sd = (variance(x) / snr).sqrt();
    let mut rng = rng_from_seed(seed);
    Ok(x.iter()
        .map(|v| v + sd * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// Signal-to-noise ratio of `y` against `x` from the least-squares fit
/// `y ≈ a x + b`: `a² var(x) / var(residual)`, capped at [`SNR_CAP`].
pub fn estimate_snr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < MIN_ESTIMATION_SAMPLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_ESTIMATION_SAMPLES} samples, got {}",
            x.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::invalid("x is constant; snr is undefined"));
    }
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = (b - my) - slope * (a - mx);
            r * r
        })
        .sum();
    let signal = slope * slope * sxx;
    if rss <= signal / SNR_CAP {
        return Ok(SNR_CAP);
    }
    Ok(signal / rss)
}

/// Homodyne SNR at Bob: `η T V_A / (1 + v_el + η T ξ)`.
pub fn distance_to_snr(params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    let t = params.transmittance();
    let eta = params.detector_efficiency;
    Ok(eta * t * params.modulation_variance
        / (1.0 + params.electronic_noise + eta * t * params.excess_noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn source_statistics_and_determinism() {
        let x = gaussian_source(1_000_000, 1.0, 7).unwrap();
        assert!((variance(&x) - 1.0).abs() < 0.01);
        assert!(mean(&x).abs() < 4.0 / 1000.0);
        assert_eq!(gaussian_source(100, 2.0, 3).unwrap(), gaussian_source(100, 2.0, 3).unwrap());
        assert_ne!(gaussian_source(100, 2.0, 3).unwrap(), gaussian_source(100, 2.0, 4).unwrap());
        assert!(gaussian_source(10, 0.0, 1).is_err());
    }

    #[test]
    fn awgn_round_trip_and_independence() {
        let x = gaussian_source(1_000_000, 1.0, 1).unwrap();
        let y = awgn(&x, 0.0226, 2).unwrap();
        let est = estimate_snr(&x, &y).unwrap();
        assert!((est / 0.0226 - 1.0).abs() < 0.03, "{est}");
        let noise: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - a).collect();
        let corr = x.iter().zip(&noise).map(|(a, b)| a * b).sum::<f64>()
            / (variance(&x) * variance(&noise)).sqrt()
            / x.len() as f64;
        assert!(corr.abs() < 0.01, "{corr}");
        let quiet = awgn(&x[..1000], 1e14, 3).unwrap();
        assert!(x.iter().zip(&quiet).all(|(a, b)| (a - b).abs() < 1e-5));
        assert!(awgn(&x, 0.0, 1).is_err());
    }

    #[test]
    fn estimate_snr_cases() {
        let x = gaussian_source(100_000, 1.0, 5).unwrap();
        let y = awgn(&x, 0.5, 6).unwrap();
        let est = estimate_snr(&x, &y).unwrap();
        assert!((est / 0.5 - 1.0).abs() < 0.05, "{est}");
        assert_eq!(estimate_snr(&x, &x).unwrap(), SNR_CAP);
        let xs: Vec<f64> = x.iter().map(|v| 3.5 * v).collect();
        let ys: Vec<f64> = y.iter().map(|v| 3.5 * v).collect();
        assert!((estimate_snr(&xs, &ys).unwrap() / est - 1.0).abs() < 1e-9);
        assert!(estimate_snr(&[1.0; 2000], &x[..2000]).is_err());
        assert!(estimate_snr(&x[..999], &y[..999]).is_err());
        assert!(estimate_snr(&x[..2000], &y[..1999]).is_err());
    }

    #[test]
    fn link_model() {
        let lossless = ChannelParams {
            distance_km: 0.0,
            loss_db_per_km: 0.2,
            detector_efficiency: 1.0,
            excess_noise: 0.0,
            electronic_noise: 0.0,
            modulation_variance: 4.2,
        };
        assert_eq!(distance_to_snr(&lossless).unwrap(), 4.2);
        let p = ChannelParams::standard(50.0, 1.0);
        assert!((p.transmittance() - 0.1).abs() < 1e-15);
        assert!(distance_to_snr(&ChannelParams { detector_efficiency: 1.5, ..p }).is_err());
        assert!(distance_to_snr(&ChannelParams { excess_noise: -0.1, ..p }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn snr_monotone_in_distance_and_va(d in 0.0f64..200.0, dd in 0.1f64..20.0, va in 0.1f64..50.0, dv in 0.1f64..5.0) {
            let s = distance_to_snr(&ChannelParams::standard(d, va)).unwrap();
            prop_assert!(distance_to_snr(&ChannelParams::standard(d + dd, va)).unwrap() < s);
            prop_assert!(distance_to_snr(&ChannelParams::standard(d, va + dv)).unwrap() > s);
        }

        #[test]
        fn round_trip_over_snr_range(log_snr in (0.01f64).ln()..(10.0f64).ln(), seed in any::<u64>()) {
            let snr = log_snr.exp();
            let n = 20_000;
            let x = gaussian_source(n, 1.0, seed).unwrap();
            let y = awgn(&x, snr, seed ^ 1).unwrap();
            let est = estimate_snr(&x, &y).unwrap();
            // delta method: relative variance of the estimate is (4/snr + 2)/n
            let sd = ((4.0 / snr + 2.0) / n as f64).sqrt();
            prop_assert!((est / snr - 1.0).abs() < 4.5 * sd, "snr {} est {}", snr, est);
        }
    }
}
