//! Finite-size secret key rate for Gaussian-modulated coherent states with
//! homodyne detection and reverse reconciliation.
//!
//! `K = α (1 - FER) [β I_AB - χ_BE - Δ(n)]`.
//!
//! `χ_BE` follows the entangling-cloner analysis with a trusted noisy
//! detector (efficiency η, electronic noise v_el), V = V_A + 1:
//!
//! ```text
//! χ_line = 1/T - 1 + ξ            χ_hom = (1 + v_el)/η - 1
//! χ_tot  = χ_line + χ_hom / T
//! A = V²(1 - 2T) + 2T + T²(V + χ_line)²     B = T²(V χ_line + 1)²
//! λ1,2² = [A ± sqrt(A² - 4B)] / 2
//! C = [V sqrt(B) + T(V + χ_line) + A χ_hom] / [T(V + χ_tot)]
//! D = sqrt(B) (V + sqrt(B) χ_hom) / [T(V + χ_tot)]
//! λ3,4² = [C ± sqrt(C² - 4D)] / 2
//! χ_BE = g(λ1) + g(λ2) - g(λ3) - g(λ4)
//! ```

use crate::channel::{distance_to_snr, ChannelParams};
use crate::ensemble::shannon_capacity;
use crate::{Error, Result};

/// Default security parameter for the finite-size offset.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Symplectic eigenvalues this far below 1 are reported as unphysical;
/// smaller shortfalls are rounding and are snapped to 1.
const EIGEN_TOLERANCE: f64 = 1e-9;

/// Search interval and tolerance for the modulation variance.
pub const VA_SEARCH_MIN: f64 = 0.01;
pub const VA_SEARCH_MAX: f64 = 100.0;
pub const VA_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateInputs {
    /// Fraction of the data used for the key.
    pub alpha: f64,
    pub fer: f64,
    pub beta: f64,
    pub channel: ChannelParams,
    pub block_size_n: f64,
    pub security_eps: f64,
}

impl KeyRateInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("fer", self.fer), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.block_size_n >= 1.0) || !self.block_size_n.is_finite() {
            return Err(Error::invalid(format!("block size must be at least 1, got {}", self.block_size_n)));
        }
        if !(self.security_eps > 0.0 && self.security_eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {}", self.security_eps)));
        }
        self.channel.validate()
    }
}

/// `½ log2(1 + snr)`.
pub fn mutual_information(snr: f64) -> Result<f64> {
    shannon_capacity(snr)
}

/// `g(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)`, with `g(1) = 0`.
pub fn g(x: f64) -> f64 {
    let a = (x + 1.0) / 2.0;
    let b = (x - 1.0) / 2.0;
    let bl = if b > 0.0 { b * b.log2() } else { 0.0 };
    a * a.log2() - bl
}

fn eigen_pair(sum: f64, product: f64) -> (f64, f64) {
    let disc = (sum * sum - 4.0 * product).max(0.0).sqrt();
    (((sum + disc) / 2.0).sqrt(), ((sum - disc) / 2.0).max(0.0).sqrt())
}

fn check_eigen(name: &str, l: f64) -> Result<f64> {
    if !l.is_finite() || l < 1.0 - EIGEN_TOLERANCE {
        return Err(Error::Unphysical(format!("symplectic eigenvalue {name} = {l} is below 1")));
    }
    Ok(l.max(1.0))
}

/// The four symplectic eigenvalues `[λ1, λ2, λ3, λ4]`.
pub fn symplectic_eigenvalues(channel: &ChannelParams) -> Result<[f64; 4]> {
    channel.validate()?;
    let t = channel.transmittance();
    if !(t > 0.0) {
        return Err(Error::Unphysical("zero transmittance".into()));
    }
    let v = channel.modulation_variance + 1.0;
    let eta = channel.detector_efficiency;
    let chi_line = 1.0 / t - 1.0 + channel.excess_noise;
    let chi_hom = (1.0 + channel.electronic_noise) / eta - 1.0;
    let chi_tot = chi_line + chi_hom / t;
    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let b = (t * (v * chi_line + 1.0)).powi(2);
    let (l1, l2) = eigen_pair(a, b);
    let sb = b.sqrt();
    let denom = t * (v + chi_tot);
    let c = (v * sb + t * (v + chi_line) + a * chi_hom) / denom;
    let d = sb * (v + sb * chi_hom) / denom;
    let (l3, l4) = eigen_pair(c, d);
    Ok([
        check_eigen("λ1", l1)?,
        check_eigen("λ2", l2)?,
        check_eigen("λ3", l3)?,
        check_eigen("λ4", l4)?,
    ])
}

/// Holevo information between Eve and Bob's homodyne outcome.
pub fn holevo_bound(channel: &ChannelParams) -> Result<f64> {
    let [l1, l2, l3, l4] = symplectic_eigenvalues(channel)?;
    Ok(g(l1) + g(l2) - g(l3) - g(l4))
}

/// `Δ(n) = 7 sqrt(log2(2/ε) / n)`.
pub fn finite_size_offset(n: f64, eps: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::invalid(format!("n must be at least 1, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(7.0 * ((2.0 / eps).log2() / n).sqrt())
}

/// Repeaterless bound `-log2(1 - T)`.
pub fn plob_bound(transmittance: f64) -> f64 {
    -(1.0 - transmittance).log2()
}

/// All intermediate quantities of one key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateBreakdown {
    pub snr: f64,
    pub i_ab: f64,
    pub chi_be: f64,
    pub delta_n: f64,
    pub k: f64,
}

pub fn key_rate_breakdown(inputs: &KeyRateInputs) -> Result<KeyRateBreakdown> {
    inputs.validate()?;
    let snr = distance_to_snr(&inputs.channel)?;
    let i_ab = mutual_information(snr)?;
    let chi_be = holevo_bound(&inputs.channel)?;
    let delta_n = finite_size_offset(inputs.block_size_n, inputs.security_eps)?;
    let k = inputs.alpha * (1.0 - inputs.fer) * (inputs.beta * i_ab - chi_be - delta_n);
    // a zero prefactor must not leave -0.0 behind
    let k = if k == 0.0 { 0.0 } else { k };
    Ok(KeyRateBreakdown {
        snr,
        i_ab,
        chi_be,
        delta_n,
        k,
    })
}

/// Bits per symbol; negative values are returned unclamped.
pub fn secret_key_rate(inputs: &KeyRateInputs) -> Result<f64> {
    Ok(key_rate_breakdown(inputs)?.k)
}

/// Modulation variance maximising `β I_AB - χ_BE` (which does not depend on
/// FER, α or n), by golden-section search over
/// `[VA_SEARCH_MIN, VA_SEARCH_MAX]`.
pub fn optimal_modulation_variance(channel: &ChannelParams, beta: f64) -> Result<f64> {
    let objective = |va: f64| -> Result<f64> {
        let ch = ChannelParams {
            modulation_variance: va,
            ..*channel
        };
        Ok(beta * mutual_information(distance_to_snr(&ch)?)? - holevo_bound(&ch)?)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (VA_SEARCH_MIN, VA_SEARCH_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > VA_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        }
    }
    Ok((lo + hi) / 2.0)
}

/// One row of a key-rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    pub va_opt: f64,
    pub breakdown: KeyRateBreakdown,
    pub plob: f64,
}

/// Key rate at one distance with the modulation variance optimised there.
/// `template.channel.distance_km` and `modulation_variance` are ignored.
pub fn key_rate_at_distance(template: &KeyRateInputs, distance_km: f64) -> Result<KeyRatePoint> {
    let channel = ChannelParams {
        distance_km,
        ..template.channel
    };
    let va_opt = optimal_modulation_variance(&channel, template.beta)?;
    let inputs = KeyRateInputs {
        channel: ChannelParams {
            modulation_variance: va_opt,
            ..channel
        },
        ..*template
    };
    let breakdown = key_rate_breakdown(&inputs)?;
    Ok(KeyRatePoint {
        distance_km,
        va_opt,
        breakdown,
        plob: plob_bound(inputs.channel.transmittance()),
    })
}

/// Distance at which the SNR under the optimised modulation variance equals
/// `target_snr`, by bisection on `[0, max_km]`.
pub fn distance_for_snr(template: &KeyRateInputs, target_snr: f64, max_km: f64) -> Result<f64> {
    let snr_at = |d: f64| -> Result<f64> { Ok(key_rate_at_distance(template, d)?.breakdown.snr) };
    let (mut lo, mut hi) = (0.0, max_km);
    if snr_at(lo)? < target_snr || snr_at(hi)? > target_snr {
        return Err(Error::invalid(format!(
            "snr {target_snr} is not reached within [0, {max_km}] km"
        )));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if snr_at(mid)? > target_snr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
