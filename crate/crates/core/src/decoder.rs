//! Flooding sum-product decoder that decodes to a target syndrome.
//!
//! LLR convention: positive favours bit 0. A check whose target bit is 1
//! flips the sign of its outgoing messages.

use crate::matrix::SparseBinaryMatrix;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Check the syndrome after every iteration and stop on a match.
    pub early_stop: bool,
    /// Magnitude bound applied to check-to-variable messages.
    pub llr_clamp: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            early_stop: true,
            llr_clamp: 30.0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.llr_clamp > 0.0) || !self.llr_clamp.is_finite() {
            return Err(Error::invalid(format!(
                "llr_clamp must be positive and finite, got {}",
                self.llr_clamp
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_syndrome_weight: usize,
}

/// `H · word` over GF(2).
pub fn syndrome(h: &SparseBinaryMatrix, word: &[u8]) -> Result<Vec<u8>> {
    if word.len() != h.cols() {
        return Err(Error::invalid(format!(
            "word has {} bits, matrix has {} columns",
            word.len(),
            h.cols()
        )));
    }
    Ok((0..h.rows())
        .map(|r| h.row(r).iter().fold(0u8, |s, &c| s ^ (word[c as usize] & 1)))
        .collect())
}

/// Decoder state shared by all frames: the Tanner graph in edge-indexed form.
///
/// Edges are numbered in row-major order. Each iteration runs the check
/// update row by row, forming variable-to-check messages on the fly as
/// `posterior - c2v`, then rebuilds the posteriors by scatter-adding the new
/// check messages; both passes walk the edges sequentially.
///
/// A weight-1 column always sends its channel LLR, so its `tanh` is taken
/// once per frame, and its hard decision is made in the `tanh` domain
/// (`L + 2 atanh(p) < 0` iff `p < -tanh(L/2)`) without forming the message.
#[derive(Debug, Clone)]
pub struct BpDecoder<'a> {
    h: &'a SparseBinaryMatrix,
    /// Per edge: the column has weight 1.
    unit_edge: Vec<bool>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(h: &'a SparseBinaryMatrix) -> Self {
        let unit_edge = (0..h.rows())
            .flat_map(|r| h.row(r).iter().map(|&c| h.col_weight(c as usize) == 1))
            .collect();
        Self { h, unit_edge }
    }

    pub fn matrix(&self) -> &SparseBinaryMatrix {
        self.h
    }

    fn check_inputs(&self, llrs: &[f64], target: &[u8], config: &DecoderConfig) -> Result<()> {
        config.validate()?;
        if llrs.len() != self.h.cols() {
            return Err(Error::invalid(format!(
                "{} LLRs for a matrix with {} columns",
                llrs.len(),
                self.h.cols()
            )));
        }
        if target.len() != self.h.rows() {
            return Err(Error::invalid(format!(
                "target syndrome has {} bits, matrix has {} rows",
                target.len(),
                self.h.rows()
            )));
        }
        if let Some(i) = llrs.iter().position(|l| !l.is_finite()) {
            return Err(Error::invalid(format!("LLR {i} is not finite: {}", llrs[i])));
        }
        Ok(())
    }

    fn syndrome_mismatch(&self, hard: &[u8], target: &[u8]) -> usize {
        (0..self.h.rows())
            .filter(|&r| {
                let s = self.h.row(r).iter().fold(0u8, |s, &c| s ^ hard[c as usize]);
                s != (target[r] & 1)
            })
            .count()
    }

    pub fn decode(&self, llrs: &[f64], target: &[u8], config: &DecoderConfig) -> Result<DecodeResult> {
        self.check_inputs(llrs, target, config)?;
        let h = self.h;
        let clamp = config.llr_clamp;
        let row_ptr = h.row_offsets();
        let unit = &self.unit_edge;
        // c2v holds LLRs, except on weight-1 edges where it keeps the raw
        // leave-one-out product
        let mut c2v = vec![0.0f64; h.edges()];
        let mut posterior = llrs.to_vec();
        let channel_tanh: Vec<f64> = llrs.iter().map(|&l| half_tanh(l)).collect();
        let mut hard: Vec<u8> = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
        let mut incoming = Vec::new();
        let mut scratch = Vec::new();

        let mut mismatch = self.syndrome_mismatch(&hard, target);
        let mut iterations = 0;
        if mismatch == 0 && config.early_stop {
            return Ok(DecodeResult {
                hard_bits: hard,
                converged: true,
                iterations_used: 0,
                final_syndrome_weight: 0,
            });
        }
        while iterations < config.max_iterations {
            iterations += 1;
            for r in 0..h.rows() {
                let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
                if hi == lo {
                    continue;
                }
                let cols = h.row(r);
                incoming.clear();
                incoming.extend(cols.iter().zip(lo..hi).map(|(&c, e)| {
                    let c = c as usize;
                    if unit[e] {
                        channel_tanh[c]
                    } else {
                        half_tanh(posterior[c] - c2v[e])
                    }
                }));
                let out = &mut c2v[lo..hi];
                leave_one_out(&incoming, target[r] & 1, out, &mut scratch);
                for ((&c, e), m) in cols.iter().zip(lo..hi).zip(out.iter_mut()) {
                    let c = c as usize;
                    if unit[e] {
                        hard[c] = unit_hard_decision(llrs[c], channel_tanh[c], *m, clamp);
                    } else {
                        *m = to_llr(*m, clamp);
                    }
                }
            }
            posterior.copy_from_slice(llrs);
            for (&c, (m, &u)) in (0..h.rows()).flat_map(|r| h.row(r)).zip(c2v.iter().zip(unit)) {
                if !u {
                    posterior[c as usize] += m;
                }
            }
            for (c, p) in posterior.iter().enumerate() {
                if h.col_weight(c) != 1 {
                    hard[c] = (*p < 0.0) as u8;
                }
            }
            if config.early_stop || iterations == config.max_iterations {
                mismatch = self.syndrome_mismatch(&hard, target);
                if mismatch == 0 && config.early_stop {
                    break;
                }
            }
        }
        Ok(DecodeResult {
            hard_bits: hard,
            converged: mismatch == 0,
            iterations_used: iterations,
            final_syndrome_weight: mismatch,
        })
    }
}

/// Rows up to this weight keep their prefix products on the stack.
const STACK_ROW: usize = 16;

/// `tanh(m/2)`, odd by construction so negating inputs negates outputs
/// exactly.
fn half_tanh(m: f64) -> f64 {
    (0.5 * m.abs()).tanh().copysign(m)
}

/// Inverse of [`half_tanh`], magnitude limited to `clamp`.
fn to_llr(p: f64, clamp: f64) -> f64 {
    (2.0 * p.abs().atanh()).min(clamp).copysign(p)
}

/// Hard decision of a weight-1 column from its channel LLR, `tanh(llr/2)`
/// and the product `p` arriving from its only check.
fn unit_hard_decision(llr: f64, t: f64, p: f64, clamp: f64) -> u8 {
    if llr.abs() < clamp {
        (p < -t) as u8
    } else {
        (llr + to_llr(p, clamp) < 0.0) as u8
    }
}

/// `out[k]` = product of all `t_j`, `j != k`, sign-flipped when
/// `target_bit` is 1.
fn leave_one_out(t: &[f64], target_bit: u8, out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = t.len();
    let sign = if target_bit == 1 { -1.0 } else { 1.0 };
    let mut stack = [1.0f64; STACK_ROW];
    let prefix: &mut [f64] = if d <= STACK_ROW {
        &mut stack[..d]
    } else {
        scratch.clear();
        scratch.resize(d, 1.0);
        scratch
    };
    // prefix[k] = prod_{j<k} t_j
    for k in 1..d {
        prefix[k] = prefix[k - 1] * t[k - 1];
    }
    let mut suffix = 1.0;
    for k in (0..d).rev() {
        out[k] = sign * prefix[k] * suffix;
        suffix *= t[k];
    }
}

/// Tanh-rule check update. `incoming` holds variable-to-check messages and is
/// overwritten with `tanh(m/2)`; `out[k]` receives the message to edge `k`
/// computed from all other edges, sign-flipped when `target_bit` is 1.
#[cfg(test)]
fn check_update(incoming: &mut [f64], target_bit: u8, clamp: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
    for x in incoming.iter_mut() {
        *x = half_tanh(*x);
    }
    leave_one_out(incoming, target_bit, out, scratch);
    for m in out.iter_mut() {
        *m = to_llr(*m, clamp);
    }
}

/// One-shot decode; builds the edge index for this call only.
pub fn decode_bp(
    h: &SparseBinaryMatrix,
    llrs: &[f64],
    target: &[u8],
    config: &DecoderConfig,
) -> Result<DecodeResult> {
    BpDecoder::new(h).decode(llrs, target, config)
}

/// A frame to decode: channel LLRs and target syndrome.
pub type Frame = (Vec<f64>, Vec<u8>);

/// Decodes frames on the worker pool; output order matches input order.
pub fn batch_decode(h: &SparseBinaryMatrix, frames: &[Frame], config: &DecoderConfig) -> Vec<Result<DecodeResult>> {
    let dec = BpDecoder::new(h);
    par::map(frames, |(l, s)| dec.decode(l, s, config))
}

/// Sequential reference for [`batch_decode`].
pub fn batch_decode_sequential(
    h: &SparseBinaryMatrix,
    frames: &[Frame],
    config: &DecoderConfig,
) -> Vec<Result<DecodeResult>> {
    let dec = BpDecoder::new(h);
    par::map_sequential(frames, |(l, s)| dec.decode(l, s, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming() -> SparseBinaryMatrix {
        SparseBinaryMatrix::from_rows(&[vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![3, 4, 5, 6]], 7).unwrap()
    }

    #[test]
    fn syndrome_basics() {
        let h = hamming();
        assert_eq!(syndrome(&h, &[0; 7]).unwrap(), vec![0, 0, 0]);
        for c in 0..7 {
            let mut w = [0u8; 7];
            w[c] = 1;
            let s = syndrome(&h, &w).unwrap();
            assert_eq!(s.iter().filter(|&&b| b == 1).count(), h.col_weight(c));
        }
        assert!(syndrome(&h, &[0; 6]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = hamming();
        let cfg = DecoderConfig::default();
        assert!(decode_bp(&h, &[1.0; 6], &[0; 3], &cfg).is_err());
        assert!(decode_bp(&h, &[1.0; 7], &[0; 2], &cfg).is_err());
        let mut l = [1.0; 7];
        l[3] = f64::NAN;
        assert!(decode_bp(&h, &l, &[0; 3], &cfg).is_err());
        l[3] = f64::INFINITY;
        assert!(decode_bp(&h, &l, &[0; 3], &cfg).is_err());
        let bad = DecoderConfig { max_iterations: 0, ..cfg };
        assert!(decode_bp(&h, &[1.0; 7], &[0; 3], &bad).is_err());
        let bad = DecoderConfig { llr_clamp: 0.0, ..cfg };
        assert!(decode_bp(&h, &[1.0; 7], &[0; 3], &bad).is_err());
    }

    #[test]
    fn noiseless_word_converges_immediately() {
        let h = hamming();
        let word = [1u8, 0, 1, 1, 0, 0, 1];
        let s = syndrome(&h, &word).unwrap();
        let llrs: Vec<f64> = word.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect();
        let res = decode_bp(&h, &llrs, &s, &DecoderConfig::default()).unwrap();
        assert!(res.converged && res.iterations_used <= 1);
        assert_eq!(res.hard_bits, word);
    }

    #[test]
    fn single_error_on_syndrome_target_corrected() {
        let h = hamming();
        let word = [0u8, 1, 1, 0, 1, 0, 0];
        let s = syndrome(&h, &word).unwrap();
        for flip in 0..7 {
            let llrs: Vec<f64> = (0..7)
                .map(|i| {
                    let b = word[i] ^ (i == flip) as u8;
                    if b == 0 { 2.0 } else { -2.0 }
                })
                .collect();
            let res = decode_bp(&h, &llrs, &s, &DecoderConfig::default()).unwrap();
            assert!(res.converged, "flip {flip}");
            assert_eq!(res.hard_bits, word, "flip {flip}");
        }
    }

    #[test]
    fn no_early_stop_runs_all_iterations() {
        let h = hamming();
        let cfg = DecoderConfig {
            max_iterations: 7,
            early_stop: false,
            ..Default::default()
        };
        let res = decode_bp(&h, &[3.0; 7], &[0; 3], &cfg).unwrap();
        assert_eq!(res.iterations_used, 7);
        assert!(res.converged);
    }

    #[test]
    fn batch_matches_single_and_sequential() {
        let h = hamming();
        let cfg = DecoderConfig::default();
        let frames: Vec<Frame> = (0..64)
            .map(|i| {
                let l: Vec<f64> = (0..7).map(|k| ((i * 7 + k) as f64 * 0.37).sin() * 3.0).collect();
                (l, vec![(i % 2) as u8, 0, ((i / 2) % 2) as u8])
            })
            .collect();
        let par: Vec<_> = batch_decode(&h, &frames, &cfg).into_iter().map(|r| r.unwrap()).collect();
        let seq: Vec<_> = batch_decode_sequential(&h, &frames, &cfg).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(par, seq);
        let one = batch_decode(&h, &frames[..1], &cfg);
        assert_eq!(one[0].as_ref().unwrap(), &decode_bp(&h, &frames[0].0, &frames[0].1, &cfg).unwrap());
        let same = vec![frames[5].clone(); 64];
        let res = batch_decode(&h, &same, &cfg);
        assert!(res.iter().all(|r| r.as_ref().unwrap() == res[0].as_ref().unwrap()));
        let mut broken = frames[..3].to_vec();
        broken[1].0[0] = f64::NAN;
        let res = batch_decode(&h, &broken, &cfg);
        assert!(res[0].is_ok() && res[1].is_err() && res[2].is_ok());
    }

    fn check_output(incoming: &[f64], target: u8) -> Vec<f64> {
        let mut m = incoming.to_vec();
        let mut out = vec![0.0; m.len()];
        check_update(&mut m, target, 30.0, &mut out, &mut Vec::new());
        out
    }

    /// Textbook flooding sum-product with explicit message arrays.
    fn reference_decode(h: &SparseBinaryMatrix, llrs: &[f64], target: &[u8], iterations: usize) -> Vec<u8> {
        let edges: Vec<(usize, usize)> = h.iter_edges().collect();
        let mut c2v = vec![0.0; edges.len()];
        let mut v2c = vec![0.0; edges.len()];
        let mut hard = vec![0u8; h.cols()];
        for _ in 0..iterations {
            for (e, &(_, c)) in edges.iter().enumerate() {
                v2c[e] = llrs[c]
                    + edges.iter().enumerate().filter(|&(f, &(_, c2))| c2 == c && f != e).map(|(f, _)| c2v[f]).sum::<f64>();
            }
            for (e, &(r, _)) in edges.iter().enumerate() {
                let p: f64 = edges
                    .iter()
                    .enumerate()
                    .filter(|&(f, &(r2, _))| r2 == r && f != e)
                    .map(|(f, _)| (0.5 * v2c[f]).tanh())
                    .product();
                let p = if target[r] == 1 { -p } else { p };
                c2v[e] = (2.0 * p.atanh()).clamp(-30.0, 30.0);
            }
            for (c, b) in hard.iter_mut().enumerate() {
                let total = llrs[c] + edges.iter().zip(&c2v).filter(|(&(_, c2), _)| c2 == c).map(|(_, m)| m).sum::<f64>();
                *b = (total < 0.0) as u8;
            }
        }
        hard
    }

    #[test]
    fn matches_reference_with_weight_one_columns() {
        // [A 0; C I] layout with two typed columns
        let h = SparseBinaryMatrix::from_rows(
            &[vec![0, 1, 2], vec![1, 2, 3], vec![0, 3, 4], vec![1, 2, 5], vec![0, 3, 6], vec![2, 4, 7]],
            8,
        )
        .unwrap();
        let mut rng = crate::rng::rng_from_seed(3);
        use rand::Rng;
        for _ in 0..50 {
            let word: Vec<u8> = (0..8).map(|_| rng.random_range(0..2)).collect();
            let target = syndrome(&h, &word).unwrap();
            let llrs: Vec<f64> = word
                .iter()
                .map(|&b| (1.0 - 2.0 * b as f64) * 0.8 + rng.random_range(-1.5..1.5))
                .collect();
            let cfg = DecoderConfig {
                max_iterations: 6,
                early_stop: false,
                ..Default::default()
            };
            let res = decode_bp(&h, &llrs, &target, &cfg).unwrap();
            assert_eq!(res.hard_bits, reference_decode(&h, &llrs, &target, 6), "llrs {llrs:?}");
        }
    }

    #[test]
    fn check_update_matches_direct_product() {
        let out = check_output(&[1.0, -2.0, 0.5], 0);
        let direct = |a: f64, b: f64| 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        assert!((out[0] - direct(-2.0, 0.5)).abs() < 1e-12);
        assert!((out[1] - direct(1.0, 0.5)).abs() < 1e-12);
        assert!((out[2] - direct(1.0, -2.0)).abs() < 1e-12);
        let flipped = check_output(&[1.0, -2.0, 0.5], 1);
        for k in 0..3 {
            assert!((flipped[k] + out[k]).abs() < 1e-12);
        }
        // saturated inputs hit the clamp instead of overflowing
        assert_eq!(check_output(&[1e6, 1e6], 0), vec![30.0, 30.0]);
        assert_eq!(check_output(&[5.0], 1), vec![-30.0]);
    }

    proptest! {
        #[test]
        fn check_update_sign_symmetry(ms in proptest::collection::vec(-40.0f64..40.0, 1..6), t in 0u8..2) {
            let neg: Vec<f64> = ms.iter().map(|m| -m).collect();
            let a = check_output(&ms, t);
            let b = check_output(&neg, t);
            // each output sees d-1 negated inputs
            let flip = if ms.len() % 2 == 0 { -1.0 } else { 1.0 };
            for k in 0..ms.len() {
                prop_assert_eq!(a[k], flip * b[k]);
                prop_assert!(a[k].abs() <= 30.0);
            }
        }

        #[test]
        fn messages_bounded_and_converged_means_syndrome(
            llrs in proptest::collection::vec(-1e6f64..1e6, 7),
            s in proptest::collection::vec(0u8..2, 3),
        ) {
            let h = hamming();
            let res = decode_bp(&h, &llrs, &s, &DecoderConfig::default()).unwrap();
            prop_assert!(res.iterations_used <= 400);
            prop_assert_eq!(res.converged, res.final_syndrome_weight == 0);
            if res.converged {
                prop_assert_eq!(syndrome(&h, &res.hard_bits).unwrap(), s);
            }
        }
    }
}
