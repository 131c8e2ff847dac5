//! Raptor-like parity-check matrices.
//!
//! The base matrix has the block form
//!
//! ```text
//!            typed cols   identity cols
//!          +------------+--------------+
//!  C1 rows |     AB     |      Z       |
//!          +------------+--------------+
//!  C2 rows |     CD     |      I       |
//!          +------------+--------------+
//! ```
//!
//! where CD row `j` is paired with identity column `j`. Puncturing removes
//! trailing (row, identity column) pairs; extension appends new pairs.

mod adapt;
pub mod alist;
mod build;
mod peg;
mod sparse;
mod stats;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

pub use adapt::{extend, puncture, Adaptation};
pub use build::{
    assemble_base, build_ab, build_base, build_cd, build_cd_avoiding, cd_row_weights, AB_COLS_W2, AB_COLS_W3,
    AB_ROWS_W3, AB_ROWS_W7, CD_COL_WEIGHT, CD_ROWS, CD_ROWS_W2, CD_ROWS_W3, TYPED_COLS,
};
pub use sparse::{RowBuilder, SparseBinaryMatrix};
pub use stats::{girth_up_to, matrix_stats, BlockEdges, StatsReport};

use crate::ensemble::Fraction;
use crate::{Error, Result};

/// Scale factor applied to every full-size block count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale(Ratio<u64>);

impl Scale {
    pub const ONE: Scale = Scale(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Self {
        Scale(Ratio::new(numer, denom))
    }

    /// `count * scale` when integral; otherwise an error naming the count.
    pub fn apply(self, name: &'static str, count: u64) -> Result<usize> {
        let scaled = self.0 * Ratio::from_integer(count);
        if !scaled.is_integer() || scaled.to_integer() == 0 {
            return Err(Error::NonIntegralScale {
                name,
                count,
                scale: self.to_string(),
            });
        }
        Ok(scaled.to_integer() as usize)
    }

    /// Checks that every block count is integral at this scale.
    pub fn check_all(self) -> Result<()> {
        for (name, count) in [
            ("ab_cols_w2", AB_COLS_W2),
            ("ab_cols_w3", AB_COLS_W3),
            ("ab_rows_w3", AB_ROWS_W3),
            ("ab_rows_w7", AB_ROWS_W7),
            ("cd_rows_w2", CD_ROWS_W2),
            ("cd_rows_w3", CD_ROWS_W3),
            ("cd_rows", CD_ROWS),
        ] {
            self.apply(name, count)?;
        }
        Ok(())
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let frac = crate::ensemble::parse_fraction(s.trim()).map_err(Error::InvalidInput)?;
        if *frac.numer() <= 0 {
            return Err(Error::invalid(format!("scale must be positive, got {s}")));
        }
        Ok(Scale::new(*frac.numer() as u64, *frac.denom() as u64))
    }
}

/// Block dimensions of an RL-LDPC matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    /// C1: rows of the AB block.
    pub ab_rows: usize,
    /// C2: rows of CD (and of any extension), each paired with an identity column.
    pub cd_rows: usize,
    /// V1 + V2: typed high-degree columns.
    pub typed_cols: usize,
    /// V3: identity columns; always equal to `cd_rows`.
    pub identity_cols: usize,
}

impl BlockLayout {
    pub fn rows(&self) -> usize {
        self.ab_rows + self.cd_rows
    }

    pub fn cols(&self) -> usize {
        self.typed_cols + self.identity_cols
    }

    /// Recovers the layout of a matrix with RL-LDPC structure: trailing
    /// weight-1 columns on the diagonal of the bottom rows.
    pub fn infer(h: &SparseBinaryMatrix) -> Option<BlockLayout> {
        let (m, n) = (h.rows(), h.cols());
        let mut k = 0;
        while k < m.min(n) {
            let col = n - 1 - k;
            if h.col(col) != [(m - 1 - k) as u32] {
                break;
            }
            k += 1;
        }
        if k == 0 {
            return None;
        }
        Some(BlockLayout {
            ab_rows: m - k,
            cd_rows: k,
            typed_cols: n - k,
            identity_cols: k,
        })
    }
}

/// A parity-check matrix together with its layout and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RlLdpcCode {
    pub matrix: SparseBinaryMatrix,
    pub layout: BlockLayout,
    pub ensemble_id: String,
    pub seed: u64,
    pub adaptation: Vec<Adaptation>,
}

impl RlLdpcCode {
    /// `(N - M) / N`.
    pub fn rate(&self) -> Fraction {
        let (m, n) = (self.matrix.rows() as i128, self.matrix.cols() as i128);
        Fraction::new(n - m, n)
    }

    /// Wraps a matrix read from disk, inferring its layout.
    pub fn from_matrix(matrix: SparseBinaryMatrix) -> Result<Self> {
        let layout = BlockLayout::infer(&matrix)
            .ok_or_else(|| Error::invalid("matrix has no trailing identity block"))?;
        Ok(Self {
            matrix,
            layout,
            ensemble_id: "unknown".into(),
            seed: 0,
            adaptation: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_parsing_and_counts() {
        let s: Scale = "1/25".parse().unwrap();
        assert_eq!(s, Scale::new(1, 25));
        assert_eq!("0.04".parse::<Scale>().unwrap(), s);
        assert_eq!(s.apply("x", 10_625).unwrap(), 425);
        assert!(s.check_all().is_ok());
        let err = Scale::new(1, 7).check_all().unwrap_err();
        assert!(matches!(err, Error::NonIntegralScale { name: "ab_cols_w2", .. }));
        assert!(Scale::new(1, 100).check_all().is_err());
        assert!("0".parse::<Scale>().is_err());
        assert_eq!(Scale::ONE.to_string(), "1");
    }

    #[test]
    fn layout_inference() {
        let code = build_base(Scale::new(1, 25), 1).unwrap();
        assert_eq!(BlockLayout::infer(&code.matrix), Some(code.layout));
    }
}
