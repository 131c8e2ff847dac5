//! Rate adaptation by cutting or appending (row, identity column) pairs.

use std::collections::HashSet;

use rand::seq::index::sample;

use super::sparse::RowBuilder;
use super::{BlockLayout, RlLdpcCode};
use crate::ensemble::{extended_rate, punctured_rate, AdaptMode, Fraction};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::{Error, Result};

/// One applied adaptation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Adaptation {
    pub mode: AdaptMode,
    pub length: u64,
    /// Rate after this step.
    pub rate: Fraction,
}

/// Keeps the upper-left `(M - p) x (N - p)` corner.
pub fn puncture(code: &RlLdpcCode, p: usize) -> Result<RlLdpcCode> {
    let layout = code.layout;
    if p >= layout.cd_rows {
        return Err(Error::invalid(format!(
            "puncture length {p} must be below the {} identity-paired rows",
            layout.cd_rows
        )));
    }
    if p == 0 {
        return Ok(code.clone());
    }
    let (m, n) = (code.matrix.rows(), code.matrix.cols());
    let matrix = code.matrix.truncate(m - p, n - p)?;
    let mut adaptation = code.adaptation.clone();
    adaptation.push(Adaptation {
        mode: AdaptMode::Puncture,
        length: p as u64,
        rate: punctured_rate(n as u64, m as u64, p as u64),
    });
    Ok(RlLdpcCode {
        matrix,
        layout: BlockLayout {
            cd_rows: layout.cd_rows - p,
            identity_cols: layout.identity_cols - p,
            ..layout
        },
        ensemble_id: code.ensemble_id.clone(),
        seed: code.seed,
        adaptation,
    })
}

/// Appends `e` check rows over the typed columns plus an `e x e` identity.
///
/// The new rows use the CD check mix: exactly `floor(0.625 e)` rows of
/// weight 2 and the rest weight 3, interleaved evenly. Entries are drawn
/// uniformly without replacement from the typed columns; a row repeating an
/// earlier new row is drawn again.
pub fn extend(code: &RlLdpcCode, e: usize, seed: u64) -> Result<RlLdpcCode> {
    if code
        .adaptation
        .iter()
        .any(|a| a.mode == AdaptMode::Puncture)
    {
        return Err(Error::invalid("extension applies to unpunctured codes only"));
    }
    if e == 0 {
        return Ok(code.clone());
    }
    let layout = code.layout;
    let (m, n) = (code.matrix.rows(), code.matrix.cols());
    let typed = layout.typed_cols;
    if typed < 3 {
        return Err(Error::invalid("too few typed columns to extend"));
    }
    let n_w2 = e * 5 / 8;
    let n_w3 = e - n_w2;
    let mut rng = rng_from_seed(derive_seed(seed, &[stream::EXTENSION]));
    let mut b = RowBuilder::with_capacity(n + e, m + e, code.matrix.edges() + 4 * e);
    for r in 0..m {
        b.push_sorted_unchecked(code.matrix.row(r));
    }
    let mut w3_done = 0usize;
    let mut row = Vec::with_capacity(4);
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(e);
    for i in 0..e {
        // Bresenham-style interleave of the weight-3 rows.
        let target = ((i + 1) * n_w3) / e;
        let weight = if target > w3_done { 3 } else { 2 };
        w3_done = target;
        loop {
            row.clear();
            row.extend(sample(&mut rng, typed, weight).into_iter().map(|c| c as u32));
            row.sort_unstable();
            if seen.insert(row.clone()) {
                break;
            }
        }
        row.push((n + i) as u32);
        b.push_sorted_unchecked(&row);
    }
    debug_assert_eq!(w3_done, n_w3);
    let mut adaptation = code.adaptation.clone();
    adaptation.push(Adaptation {
        mode: AdaptMode::Extend,
        length: e as u64,
        rate: extended_rate(n as u64, m as u64, e as u64),
    });
    Ok(RlLdpcCode {
        matrix: b.finish(),
        layout: BlockLayout {
            cd_rows: layout.cd_rows + e,
            identity_cols: layout.identity_cols + e,
            ..layout
        },
        ensemble_id: code.ensemble_id.clone(),
        seed: code.seed,
        adaptation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_base, Scale};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn base() -> &'static RlLdpcCode {
        static BASE: OnceLock<RlLdpcCode> = OnceLock::new();
        BASE.get_or_init(|| build_base(Scale::new(1, 25), 3).unwrap())
    }

    #[test]
    fn puncture_dimensions_and_rate() {
        let code = base();
        let p = puncture(code, 13_688).unwrap();
        assert_eq!((p.matrix.rows(), p.matrix.cols()), (39_200 - 13_688, 40_000 - 13_688));
        assert_eq!(p.rate(), Fraction::new(800, 26_312));
        assert_eq!(p.adaptation.last().unwrap().rate, p.rate());
        assert_eq!(puncture(code, 0).unwrap(), *code);
        assert!(puncture(code, code.layout.cd_rows).is_err());
    }

    #[test]
    fn extend_dimensions_weights_and_rate() {
        let code = base();
        let x = extend(code, 10_000, 4).unwrap();
        assert_eq!((x.matrix.rows(), x.matrix.cols()), (49_200, 50_000));
        assert_eq!(x.rate(), Fraction::new(16, 1000));
        let new_rows = 39_200..49_200;
        let w2 = new_rows.clone().filter(|&r| x.matrix.row_weight(r) == 3).count();
        let w3 = new_rows.clone().filter(|&r| x.matrix.row_weight(r) == 4).count();
        assert_eq!((w2, w3), (6250, 3750));
        assert_eq!(x.matrix.edges(), code.matrix.edges() + 6250 * 3 + 3750 * 4);
        for r in new_rows {
            let row = x.matrix.row(r);
            assert_eq!(*row.last().unwrap() as usize, 40_000 + (r - 39_200));
            assert!(row[..row.len() - 1].iter().all(|&c| (c as usize) < 1600));
        }
        assert_eq!(extend(code, 0, 4).unwrap(), *code);
        let punctured = puncture(code, 8).unwrap();
        assert!(extend(&punctured, 8, 4).is_err());
    }

    #[test]
    fn extend_then_puncture_recovers_base() {
        let code = base();
        let x = extend(code, 5000, 1).unwrap();
        let back = puncture(&x, 5000).unwrap();
        assert_eq!(back.matrix, code.matrix);
        assert_eq!(back.layout, code.layout);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn puncture_composes(a in 0usize..15_000, b in 0usize..15_000) {
            let code = base();
            let once = puncture(code, a + b).unwrap();
            let twice = puncture(&puncture(code, a).unwrap(), b).unwrap();
            prop_assert_eq!(&once.matrix, &twice.matrix);
            prop_assert_eq!(once.layout, twice.layout);
            let n = once.matrix.cols();
            for r in 0..once.matrix.rows() {
                prop_assert!(once.matrix.row(r).iter().all(|&c| (c as usize) < n));
            }
            prop_assert_eq!(once.rate(), punctured_rate(40_000, 39_200, (a + b) as u64));
        }
    }
}
