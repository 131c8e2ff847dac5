//! Monte Carlo frame-error simulation of the full reconciliation chain.
//!
//! Per frame: Alice draws Gaussian `x`, Bob receives `y = x + noise` and a
//! random key `k`. Bob sends the 8-D mapping matrices built from `(y, k)`,
//! his relative block norms and the syndrome `H k`. Alice turns `x` and the
//! side information into LLRs and decodes to Bob's syndrome. A frame fails
//! when the decoder does not converge or converges to a word other than `k`.

use std::time::Instant;

use rand::Rng;

use crate::channel::{awgn, estimate_snr, gaussian_source, MIN_ESTIMATION_SAMPLES};
use crate::decoder::{syndrome, BpDecoder, DecoderConfig};
use crate::ensemble::shannon_capacity;
use crate::matrix::SparseBinaryMatrix;
use crate::reconcile::{reconcile_receive_with_norms, reconcile_transmit, relative_norms, DIM};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::{par, Error, Result};

/// The simulated inputs of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    pub key: Vec<u8>,
    pub llrs: Vec<f64>,
    pub syndrome: Vec<u8>,
    /// SNR Alice used for the LLRs.
    pub snr_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub converged: bool,
    /// Decoded word equals the key.
    pub correct: bool,
    pub iterations: usize,
}

impl FrameOutcome {
    pub fn is_error(&self) -> bool {
        !(self.converged && self.correct)
    }
}

/// Seed of stream `s` in frame `frame` of sweep point `point`.
pub fn frame_seed(root: u64, point: u64, frame: u64, s: u64) -> u64 {
    derive_seed(root, &[point, frame, s])
}

/// Generates one frame at `snr`. Alice estimates the SNR from all samples
/// when there are enough of them, otherwise she uses `snr` itself.
pub fn simulate_frame_data(h: &SparseBinaryMatrix, snr: f64, root: u64, point: u64, frame: u64) -> Result<FrameData> {
    let n = h.cols();
    if n % DIM != 0 {
        return Err(Error::invalid(format!("code length {n} is not a multiple of {DIM}")));
    }
    let x = gaussian_source(n, 1.0, frame_seed(root, point, frame, stream::SOURCE))?;
    let y = awgn(&x, snr, frame_seed(root, point, frame, stream::NOISE))?;
    let mut rng = rng_from_seed(frame_seed(root, point, frame, stream::KEY));
    let key: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let (maps, norms) = reconcile_transmit(&y, &key)?;
    let target = syndrome(h, &key)?;
    let snr_used = if n >= MIN_ESTIMATION_SAMPLES {
        estimate_snr(&x, &y)?
    } else {
        snr
    };
    let llrs = reconcile_receive_with_norms(&x, &maps, &relative_norms(&norms)?, snr_used)?;
    Ok(FrameData {
        key,
        llrs,
        syndrome: target,
        snr_used,
    })
}

pub fn run_frame(dec: &BpDecoder, snr: f64, root: u64, point: u64, frame: u64, config: &DecoderConfig) -> Result<FrameOutcome> {
    let h = dec.matrix();
    let data = simulate_frame_data(h, snr, root, point, frame)?;
    let res = dec.decode(&data.llrs, &data.syndrome, config)?;
    Ok(FrameOutcome {
        converged: res.converged,
        correct: res.hard_bits == data.key,
        iterations: res.iterations_used,
    })
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub snr: f64,
    pub beta: f64,
    pub frames: usize,
    pub errors: usize,
    /// Converged to a wrong word.
    pub undetected: usize,
    pub fer: f64,
    pub mean_iters: f64,
    pub wall_ms: u128,
}

impl PointResult {
    pub const CSV_HEADER: &'static str = "snr,beta,frames,errors,undetected,fer,mean_iters,wall_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.snr, self.beta, self.frames, self.errors, self.undetected, self.fer, self.mean_iters, self.wall_ms
        )
    }
}

fn summarise(snr: f64, rate: f64, outcomes: Vec<Result<FrameOutcome>>, started: Instant) -> Result<PointResult> {
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let frames = outcomes.len();
    let errors = outcomes.iter().filter(|o| o.is_error()).count();
    let undetected = outcomes.iter().filter(|o| o.converged && !o.correct).count();
    let iters: usize = outcomes.iter().map(|o| o.iterations).sum();
    let beta = if snr.is_finite() { rate / shannon_capacity(snr)? } else { 0.0 };
    Ok(PointResult {
        snr,
        beta,
        frames,
        errors,
        undetected,
        fer: if frames > 0 { errors as f64 / frames as f64 } else { 0.0 },
        mean_iters: if frames > 0 { iters as f64 / frames as f64 } else { 0.0 },
        wall_ms: started.elapsed().as_millis(),
    })
}

/// Simulates `frames` frames of sweep point `point` at `snr`, frames in
/// parallel when the `parallel` feature is on.
pub fn run_point(
    dec: &BpDecoder,
    rate: f64,
    snr: f64,
    frames: usize,
    root: u64,
    point: u64,
    config: &DecoderConfig,
) -> Result<PointResult> {
    let started = Instant::now();
    let idx: Vec<u64> = (0..frames as u64).collect();
    let outcomes = par::map(&idx, |&f| run_frame(dec, snr, root, point, f, config));
    summarise(snr, rate, outcomes, started)
}

/// Sequential reference for [`run_point`].
pub fn run_point_sequential(
    dec: &BpDecoder,
    rate: f64,
    snr: f64,
    frames: usize,
    root: u64,
    point: u64,
    config: &DecoderConfig,
) -> Result<PointResult> {
    let started = Instant::now();
    let idx: Vec<u64> = (0..frames as u64).collect();
    let outcomes = par::map_sequential(&idx, |&f| run_frame(dec, snr, root, point, f, config));
    summarise(snr, rate, outcomes, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_base, Scale};
    use std::sync::OnceLock;

    fn code() -> &'static crate::matrix::RlLdpcCode {
        static CODE: OnceLock<crate::matrix::RlLdpcCode> = OnceLock::new();
        CODE.get_or_init(|| build_base(Scale::new(1, 25), 1).unwrap())
    }

    #[test]
    fn frame_data_is_deterministic_and_consistent() {
        let h = &code().matrix;
        let a = simulate_frame_data(h, 0.03, 9, 0, 4).unwrap();
        let b = simulate_frame_data(h, 0.03, 9, 0, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(syndrome(h, &a.key).unwrap(), a.syndrome);
        let c = simulate_frame_data(h, 0.03, 9, 0, 5).unwrap();
        assert_ne!(a.key, c.key);
        assert!((a.snr_used / 0.03 - 1.0).abs() < 0.2);
    }

    #[test]
    fn zero_noise_point_has_no_errors() {
        let dec = BpDecoder::new(&code().matrix);
        let r = run_point(&dec, 0.02, f64::INFINITY, 3, 1, 0, &DecoderConfig::default()).unwrap();
        assert_eq!((r.frames, r.errors, r.undetected), (3, 0, 0));
        assert_eq!(r.fer, 0.0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let dec = BpDecoder::new(&code().matrix);
        let cfg = DecoderConfig {
            max_iterations: 30,
            ..Default::default()
        };
        let a = run_point(&dec, 0.02, 0.05, 4, 2, 1, &cfg).unwrap();
        let b = run_point_sequential(&dec, 0.02, 0.05, 4, 2, 1, &cfg).unwrap();
        assert_eq!((a.errors, a.undetected, a.mean_iters), (b.errors, b.undetected, b.mean_iters));
    }
}
