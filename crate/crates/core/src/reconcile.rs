//! Eight-dimensional multidimensional reverse reconciliation.
//!
//! Bob normalises each 8-block of his Gaussian data `y`, maps 8 key bits to
//! `u = (±1/√8, ...)` and sends the orthogonal matrix `M` with `M ŷ = u`.
//! Alice applies `M` to her normalised block `x̂`; `v = M x̂` is a noisy copy
//! of `u`, i.e. the output of a virtual binary-input AWGN channel.
//!
//! Bob may also disclose his block norms `‖y‖` relative to his frame RMS.
//! They carry no key information (the key sits in the direction of `y`) and
//! let Alice weight each block by its actual noise scaling, which recovers
//! most of the mutual information lost when she has to guess them.
//!
//! `M = Σ α_i A_i` with `α_i = (A_i ŷ)·u`, where `A_i` is left multiplication
//! by the octonion unit `e_{i-1}`. For any unit `ŷ` the vectors `A_i ŷ` are
//! orthonormal, and `M` is left multiplication by the unit octonion `α`,
//! hence orthogonal.

use crate::{Error, Result};

/// Reconciliation dimension.
pub const DIM: usize = 8;

pub type Vec8 = [f64; DIM];
pub type Mat8 = [[f64; DIM]; DIM];

const UNIT_TOLERANCE: f64 = 1e-9;

/// Quaternion-style triples `e_a e_b = e_c` of the octonion imaginary units.
const FANO_TRIPLES: [(usize, usize, usize); 7] = [
    (1, 2, 4),
    (2, 3, 5),
    (3, 4, 6),
    (4, 5, 7),
    (5, 6, 1),
    (6, 7, 2),
    (7, 1, 3),
];

/// `e_a e_b = sign * e_index`.
fn unit_product(a: usize, b: usize) -> (f64, usize) {
    if a == 0 {
        return (1.0, b);
    }
    if b == 0 {
        return (1.0, a);
    }
    if a == b {
        return (-1.0, 0);
    }
    for &(i, j, k) in &FANO_TRIPLES {
        // cyclic rotations give +, reversed order gives -
        for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
            if (a, b) == (x, y) {
                return (1.0, z);
            }
            if (a, b) == (y, x) {
                return (-1.0, z);
            }
        }
    }
    unreachable!("every pair of distinct units lies on one Fano line")
}

/// The eight signed-permutation matrices `A_1..A_8`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalBasisSet {
    pub matrices: [Mat8; DIM],
}

impl OrthogonalBasisSet {
    /// `[A_1 y, ..., A_8 y]`.
    pub fn apply_all(&self, y: &Vec8) -> [Vec8; DIM] {
        let mut out = [[0.0; DIM]; DIM];
        for (o, a) in out.iter_mut().zip(&self.matrices) {
            *o = mat_vec(a, y);
        }
        out
    }
}

/// Left-multiplication matrices of the octonion units.
pub fn octonion_basis() -> OrthogonalBasisSet {
    let mut matrices = [[[0.0; DIM]; DIM]; DIM];
    for (a, m) in matrices.iter_mut().enumerate() {
        for b in 0..DIM {
            let (sign, k) = unit_product(a, b);
            m[k][b] = sign;
        }
    }
    OrthogonalBasisSet { matrices }
}

pub fn mat_vec(m: &Mat8, v: &Vec8) -> Vec8 {
    let mut out = [0.0; DIM];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn dot(a: &Vec8, b: &Vec8) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &Vec8) -> f64 {
    dot(v, v).sqrt()
}

/// `w / ‖w‖` and `‖w‖`.
pub fn normalize(w: &Vec8) -> Result<(Vec8, f64)> {
    let n = norm(w);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Degenerate(format!("cannot normalise vector of norm {n}")));
    }
    let mut u = *w;
    u.iter_mut().for_each(|x| *x /= n);
    Ok((u, n))
}

/// `u_i = (-1)^{b_i} / √8`.
pub fn map_bits_to_sphere(bits: &[u8]) -> Result<Vec8> {
    if bits.len() != DIM {
        return Err(Error::invalid(format!("expected {DIM} bits, got {}", bits.len())));
    }
    let amp = 1.0 / (DIM as f64).sqrt();
    let mut u = [0.0; DIM];
    for (x, &b) in u.iter_mut().zip(bits) {
        *x = if b & 1 == 0 { amp } else { -amp };
    }
    Ok(u)
}

/// Orthogonal `M(y, u)` with `M y = u`, and the coordinates `α(y, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingFunction {
    pub matrix: Mat8,
    pub alpha: Vec8,
}

impl MappingFunction {
    pub fn apply(&self, v: &Vec8) -> Vec8 {
        mat_vec(&self.matrix, v)
    }
}

fn check_unit(v: &Vec8, name: &str) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::invalid(format!("{name} must be unit norm, got {n}")));
    }
    Ok(())
}

pub fn compute_mapping(basis: &OrthogonalBasisSet, y: &Vec8, u: &Vec8) -> Result<MappingFunction> {
    check_unit(y, "y")?;
    check_unit(u, "u")?;
    let images = basis.apply_all(y);
    let mut alpha = [0.0; DIM];
    for (a, img) in alpha.iter_mut().zip(&images) {
        *a = dot(img, u);
    }
    let mut matrix = [[0.0; DIM]; DIM];
    for (a, basis_m) in alpha.iter().zip(&basis.matrices) {
        for (row, brow) in matrix.iter_mut().zip(basis_m) {
            for (x, b) in row.iter_mut().zip(brow) {
                *x += a * b;
            }
        }
    }
    Ok(MappingFunction { matrix, alpha })
}

fn block(frame: &[f64], i: usize) -> Vec8 {
    frame[i * DIM..(i + 1) * DIM].try_into().expect("block of 8")
}

/// Bob's side: one mapping function per 8-block, plus the block norms `‖y‖`.
pub fn reconcile_transmit(y_frame: &[f64], key_bits: &[u8]) -> Result<(Vec<MappingFunction>, Vec<f64>)> {
    if y_frame.len() % DIM != 0 {
        return Err(Error::invalid(format!(
            "frame length {} is not a multiple of {DIM}",
            y_frame.len()
        )));
    }
    if key_bits.len() != y_frame.len() {
        return Err(Error::invalid(format!(
            "{} key bits for a frame of {}",
            key_bits.len(),
            y_frame.len()
        )));
    }
    let basis = octonion_basis();
    let blocks = y_frame.len() / DIM;
    let mut maps = Vec::with_capacity(blocks);
    let mut norms = Vec::with_capacity(blocks);
    for i in 0..blocks {
        let (y_hat, n) = normalize(&block(y_frame, i))?;
        let u = map_bits_to_sphere(&key_bits[i * DIM..(i + 1) * DIM])?;
        maps.push(compute_mapping(&basis, &y_hat, &u)?);
        norms.push(n);
    }
    Ok((maps, norms))
}

/// Bob's block norms divided by his frame RMS, the form in which they are
/// disclosed.
pub fn relative_norms(norms: &[f64]) -> Result<Vec<f64>> {
    if norms.is_empty() {
        return Ok(Vec::new());
    }
    let mean_sq = norms.iter().map(|n| n * n).sum::<f64>() / (norms.len() * DIM) as f64;
    if !(mean_sq > 0.0) || !mean_sq.is_finite() {
        return Err(Error::Degenerate(format!("frame mean square {mean_sq}")));
    }
    let rms = mean_sq.sqrt();
    Ok(norms.iter().map(|n| n / rms).collect())
}

/// Alice's side without disclosed norms: virtual-channel LLRs (positive
/// favours bit 0).
///
/// With her data scaled to unit variance and `σ² = 1/snr`, the per-coordinate
/// channel is `v_i ‖X‖ = ‖Y‖ u_i / (1+σ²) + noise(σ²/(1+σ²))`, giving
/// `LLR_i = 2 ‖Y‖ ‖X‖ v_i / (√8 σ²)`. Bob's norm is estimated from her own as
/// `‖Y‖ ≈ sqrt(‖X‖² + 8σ²)`.
pub fn reconcile_receive(x_frame: &[f64], side_info: &[MappingFunction], snr: f64) -> Result<Vec<f64>> {
    receive(x_frame, side_info, None, snr)
}

/// Alice's side with Bob's [`relative_norms`]: same LLR as
/// [`reconcile_receive`] with `‖Y‖ = r sqrt(1+σ²)`, which is exact per
/// coordinate.
pub fn reconcile_receive_with_norms(
    x_frame: &[f64],
    side_info: &[MappingFunction],
    y_relative_norms: &[f64],
    snr: f64,
) -> Result<Vec<f64>> {
    if y_relative_norms.len() != side_info.len() {
        return Err(Error::invalid(format!(
            "{} norms for {} mapping blocks",
            y_relative_norms.len(),
            side_info.len()
        )));
    }
    receive(x_frame, side_info, Some(y_relative_norms), snr)
}

fn receive(x_frame: &[f64], side_info: &[MappingFunction], y_rel: Option<&[f64]>, snr: f64) -> Result<Vec<f64>> {
    if x_frame.len() != side_info.len() * DIM {
        return Err(Error::invalid(format!(
            "frame of {} values for {} mapping blocks",
            x_frame.len(),
            side_info.len()
        )));
    }
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::invalid(format!("snr must be positive and finite, got {snr}")));
    }
    if x_frame.is_empty() {
        return Ok(Vec::new());
    }
    let var_x = x_frame.iter().map(|x| x * x).sum::<f64>() / x_frame.len() as f64;
    if !(var_x > 0.0) {
        return Err(Error::Degenerate("received frame is identically zero".into()));
    }
    let sigma2 = 1.0 / snr;
    let y_rms = (1.0 + sigma2).sqrt();
    let sqrt_d = (DIM as f64).sqrt();
    let mut llrs = Vec::with_capacity(x_frame.len());
    for (i, m) in side_info.iter().enumerate() {
        let (x_hat, n) = normalize(&block(x_frame, i))?;
        let x_norm = n / var_x.sqrt();
        let y_norm = match y_rel {
            Some(r) => r[i] * y_rms,
            None => (x_norm * x_norm + DIM as f64 * sigma2).sqrt(),
        };
        let scale = 2.0 * y_norm * x_norm / (sqrt_d * sigma2);
        llrs.extend(m.apply(&x_hat).iter().map(|v| scale * v));
    }
    Ok(llrs)
}

const SIDE_INFO_HEADER: usize = 16;

/// Serialises mapping matrices: `u64` block count and `u64` dimension (both
/// little-endian), then 64 little-endian `f64` per block, row-major.
pub fn encode_side_info(maps: &[MappingFunction]) -> Vec<u8> {
    let mut out = Vec::with_capacity(SIDE_INFO_HEADER + maps.len() * DIM * DIM * 8);
    out.extend_from_slice(&(maps.len() as u64).to_le_bytes());
    out.extend_from_slice(&(DIM as u64).to_le_bytes());
    for m in maps {
        for row in &m.matrix {
            for x in row {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

/// Inverse of [`encode_side_info`]; `alpha` is recovered as the first column
/// of `M` (the image of the unit octonion).
pub fn decode_side_info(bytes: &[u8]) -> Result<Vec<MappingFunction>> {
    if bytes.len() < SIDE_INFO_HEADER {
        return Err(Error::invalid("side information shorter than its header"));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let blocks = word(0) as usize;
    let dim = word(8) as usize;
    if dim != DIM {
        return Err(Error::invalid(format!("side information dimension {dim}, expected {DIM}")));
    }
    let expected = blocks
        .checked_mul(DIM * DIM * 8)
        .and_then(|b| b.checked_add(SIDE_INFO_HEADER))
        .ok_or_else(|| Error::invalid("side information block count overflows"))?;
    if bytes.len() != expected {
        return Err(Error::invalid(format!(
            "side information has {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let mut maps = Vec::with_capacity(blocks);
    let mut off = SIDE_INFO_HEADER;
    for _ in 0..blocks {
        let mut matrix = [[0.0; DIM]; DIM];
        for row in matrix.iter_mut() {
            for x in row.iter_mut() {
                *x = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
                off += 8;
            }
        }
        let alpha = std::array::from_fn(|k| matrix[k][0]);
        maps.push(MappingFunction { matrix, alpha });
    }
    Ok(maps)
}

/// Serialises disclosed norms: `u64` count, then little-endian `f64` values.
pub fn encode_norms(norms: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + norms.len() * 8);
    out.extend_from_slice(&(norms.len() as u64).to_le_bytes());
    for n in norms {
        out.extend_from_slice(&n.to_le_bytes());
    }
    out
}

pub fn decode_norms(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 8 {
        return Err(Error::invalid("norm list shorter than its header"));
    }
    let count = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    if Some(bytes.len()) != count.checked_mul(8).and_then(|b| b.checked_add(8)) {
        return Err(Error::invalid(format!("norm list has {} bytes for {count} values", bytes.len())));
    }
    Ok(bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_unit(rng: &mut impl Rng) -> Vec8 {
        let w: Vec8 = std::array::from_fn(|_| rng.sample(StandardNormal));
        normalize(&w).unwrap().0
    }

    #[test]
    fn basis_matrices_are_signed_permutations() {
        let basis = octonion_basis();
        for (i, a) in basis.matrices.iter().enumerate() {
            for r in 0..DIM {
                let nz: Vec<f64> = a[r].iter().copied().filter(|x| *x != 0.0).collect();
                assert_eq!(nz.len(), 1);
                assert!(nz[0] == 1.0 || nz[0] == -1.0);
                for s in 0..DIM {
                    let d: f64 = (0..DIM).map(|k| a[r][k] * a[s][k]).sum();
                    assert_eq!(d, if r == s { 1.0 } else { 0.0 }, "A_{} row {r} {s}", i + 1);
                }
            }
        }
        let identity: Mat8 = std::array::from_fn(|r| std::array::from_fn(|c| (r == c) as u8 as f64));
        assert_eq!(basis.matrices[0], identity);
    }

    #[test]
    fn gram_exact_for_axis_vector() {
        let basis = octonion_basis();
        let y = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let imgs = basis.apply_all(&y);
        for i in 0..DIM {
            for j in 0..DIM {
                assert_eq!(dot(&imgs[i], &imgs[j]), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn normalize_cases() {
        let (u, n) = normalize(&[3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(n, 5.0);
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
        assert!(matches!(normalize(&[0.0; DIM]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sphere_mapping() {
        let a = 1.0 / 8f64.sqrt();
        assert_eq!(map_bits_to_sphere(&[0; 8]).unwrap(), [a; 8]);
        assert_eq!(map_bits_to_sphere(&[1; 8]).unwrap(), [-a; 8]);
        assert!(map_bits_to_sphere(&[0; 7]).is_err());
    }

    #[test]
    fn mapping_fixes_y_when_u_equals_y() {
        let basis = octonion_basis();
        let mut rng = rng_from_seed(1);
        let y = random_unit(&mut rng);
        let m = compute_mapping(&basis, &y, &y).unwrap();
        let my = m.apply(&y);
        for k in 0..DIM {
            assert!((my[k] - y[k]).abs() < 1e-14);
        }
        assert!(compute_mapping(&basis, &[1.0; 8], &y).is_err());
    }

    #[test]
    fn transmit_rejects_bad_lengths() {
        assert!(reconcile_transmit(&[1.0; 12], &[0; 12]).is_err());
        assert!(reconcile_transmit(&[1.0; 16], &[0; 8]).is_err());
        let (maps, norms) = reconcile_transmit(&[1.0; 16], &[0; 16]).unwrap();
        assert_eq!((maps.len(), norms.len()), (2, 2));
        assert!(reconcile_receive(&[1.0; 8], &maps, 1.0).is_err());
    }

    #[test]
    fn llrs_vanish_at_low_snr() {
        let mut rng = rng_from_seed(4);
        let y: Vec<f64> = (0..64).map(|_| rng.sample(StandardNormal)).collect();
        let bits: Vec<u8> = (0..64).map(|i| (i % 3 == 0) as u8).collect();
        let (maps, _) = reconcile_transmit(&y, &bits).unwrap();
        let small = reconcile_receive(&y, &maps, 1e-12).unwrap();
        assert!(small.iter().all(|l| l.abs() < 1e-4));
    }

    #[test]
    fn side_info_round_trip() {
        let mut rng = rng_from_seed(2);
        let y: Vec<f64> = (0..32).map(|_| rng.sample(StandardNormal)).collect();
        let bits: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
        let (maps, _) = reconcile_transmit(&y, &bits).unwrap();
        let bytes = encode_side_info(&maps);
        assert_eq!(bytes.len(), 16 + 4 * 512);
        assert_eq!(&bytes[..16], &[4, 0, 0, 0, 0, 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0]);
        let back = decode_side_info(&bytes).unwrap();
        for (a, b) in maps.iter().zip(&back) {
            assert_eq!(a.matrix, b.matrix);
            for k in 0..DIM {
                assert!((a.alpha[k] - b.alpha[k]).abs() < 1e-15);
            }
        }
        assert!(decode_side_info(&bytes[..100]).is_err());
    }

    #[test]
    fn relative_norms_have_unit_rms() {
        let mut rng = rng_from_seed(8);
        let y: Vec<f64> = (0..800).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let (_, norms) = reconcile_transmit(&y, &[0; 800]).unwrap();
        let rel = relative_norms(&norms).unwrap();
        let ms = rel.iter().map(|r| r * r).sum::<f64>() / (rel.len() * DIM) as f64;
        assert!((ms - 1.0).abs() < 1e-12);
        assert!(relative_norms(&[0.0, 0.0]).is_err());
        assert_eq!(decode_norms(&encode_norms(&rel)).unwrap(), rel);
        assert!(decode_norms(&encode_norms(&rel)[..20]).is_err());
    }

    #[test]
    fn disclosed_norms_agree_with_estimate_when_noiseless() {
        let mut rng = rng_from_seed(9);
        let x: Vec<f64> = (0..8000).map(|_| rng.sample(StandardNormal)).collect();
        let bits: Vec<u8> = (0..8000).map(|_| rng.random_range(0..2)).collect();
        let (maps, norms) = reconcile_transmit(&x, &bits).unwrap();
        let rel = relative_norms(&norms).unwrap();
        let a = reconcile_receive(&x, &maps, 1e9).unwrap();
        let b = reconcile_receive_with_norms(&x, &maps, &rel, 1e9).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p / q - 1.0).abs() < 1e-6);
        }
        assert!(reconcile_receive_with_norms(&x, &maps, &rel[1..], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn mapping_invariants(seed in any::<u64>(), bits in proptest::collection::vec(0u8..2, 8)) {
            let basis = octonion_basis();
            let mut rng = rng_from_seed(seed);
            let y = random_unit(&mut rng);
            let u = map_bits_to_sphere(&bits).unwrap();
            let m = compute_mapping(&basis, &y, &u).unwrap();
            let my = m.apply(&y);
            for k in 0..DIM {
                prop_assert!((my[k] - u[k]).abs() < 1e-10);
            }
            // norm preservation on an unrelated vector
            let w: Vec8 = std::array::from_fn(|_| rng.sample(StandardNormal));
            prop_assert!((norm(&m.apply(&w)) - norm(&w)).abs() < 1e-10);
        }

        #[test]
        fn noiseless_llr_signs_match_key(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x: Vec<f64> = (0..64).map(|_| rng.sample(StandardNormal)).collect();
            let bits: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
            let (maps, _) = reconcile_transmit(&x, &bits).unwrap();
            let llrs = reconcile_receive(&x, &maps, 1e6).unwrap();
            for (l, b) in llrs.iter().zip(&bits) {
                prop_assert_eq!(*l < 0.0, *b == 1);
            }
        }
    }
}
