//! Sparse binary matrix with row- and column-major adjacency.

use crate::{Error, Result};

/// Binary matrix stored twice: compressed rows (sorted column indices) and
/// compressed columns (sorted row indices). Both views describe one edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    col_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl SparseBinaryMatrix {
    /// Builds a matrix from per-row column lists. Lists are sorted; duplicates
    /// and out-of-range columns are rejected.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut b = RowBuilder::new(cols);
        for r in rows {
            b.push_row(r.as_ref())?;
        }
        Ok(b.finish())
    }

    /// The all-zero `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let mut b = RowBuilder::new(cols);
        for _ in 0..rows {
            b.push_sorted_unchecked(&[]);
        }
        b.finish()
    }

    fn from_csr(rows: usize, cols: usize, row_ptr: Vec<usize>, row_idx: Vec<u32>) -> Self {
        let mut col_ptr = vec![0usize; cols + 1];
        for &c in &row_idx {
            col_ptr[c as usize + 1] += 1;
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut fill = col_ptr.clone();
        let mut col_idx = vec![0u32; row_idx.len()];
        for r in 0..rows {
            for &c in &row_idx[row_ptr[r]..row_ptr[r + 1]] {
                col_idx[fill[c as usize]] = r as u32;
                fill[c as usize] += 1;
            }
        }
        Self {
            rows,
            cols,
            row_ptr,
            row_idx,
            col_ptr,
            col_idx,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn edges(&self) -> usize {
        self.row_idx.len()
    }

    /// Sorted column indices of row `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.row_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Sorted row indices of column `c`.
    pub fn col(&self, c: usize) -> &[u32] {
        &self.col_idx[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&(c as u32)).is_ok()
    }

    /// Offsets of each row's slice in row-major edge order (`rows + 1` entries).
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_ptr
    }

    /// Offsets of each column's slice in column-major edge order.
    pub fn col_offsets(&self) -> &[usize] {
        &self.col_ptr
    }

    /// Iterates `(row, col)` pairs in row-major order.
    pub fn iter_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c as usize)))
    }

    /// Keeps the upper-left `rows x cols` corner. Fails if a kept row has an
    /// entry in a dropped column.
    pub fn truncate(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::invalid(format!(
                "cannot truncate {}x{} to {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        let end = self.row_ptr[rows];
        if let Some(r) = (0..rows).find(|&r| self.row(r).last().is_some_and(|&c| c as usize >= cols)) {
            return Err(Error::invalid(format!(
                "row {r} has entries beyond column {cols}"
            )));
        }
        Ok(Self::from_csr(
            rows,
            cols,
            self.row_ptr[..=rows].to_vec(),
            self.row_idx[..end].to_vec(),
        ))
    }

    /// Checks that the row and column views describe the same edge set.
    pub fn is_consistent(&self) -> bool {
        if self.row_idx.len() != self.col_idx.len()
            || self.row_ptr.len() != self.rows + 1
            || self.col_ptr.len() != self.cols + 1
        {
            return false;
        }
        let rebuilt = Self::from_csr(self.rows, self.cols, self.row_ptr.clone(), self.row_idx.clone());
        rebuilt.col_ptr == self.col_ptr && rebuilt.col_idx == self.col_idx
    }
}

/// Incremental row-major builder.
#[derive(Debug)]
pub struct RowBuilder {
    cols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    scratch: Vec<u32>,
}

impl RowBuilder {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            row_ptr: vec![0],
            row_idx: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn with_capacity(cols: usize, rows: usize, edges: usize) -> Self {
        let mut b = Self::new(cols);
        b.row_ptr.reserve(rows);
        b.row_idx.reserve(edges);
        b
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        let r = self.rows();
        self.scratch.clear();
        self.scratch.extend_from_slice(row);
        self.scratch.sort_unstable();
        for w in self.scratch.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge {
                    row: r,
                    col: w[0] as usize,
                });
            }
        }
        if let Some(&c) = self.scratch.last() {
            if c as usize >= self.cols {
                return Err(Error::invalid(format!(
                    "row {r}: column {c} out of range for {} columns",
                    self.cols
                )));
            }
        }
        self.row_idx.extend_from_slice(&self.scratch);
        self.row_ptr.push(self.row_idx.len());
        Ok(())
    }

    /// Appends a row already known to be sorted, distinct and in range.
    pub(crate) fn push_sorted_unchecked(&mut self, row: &[u32]) {
        debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
        self.row_idx.extend_from_slice(row);
        self.row_ptr.push(self.row_idx.len());
    }

    pub fn finish(self) -> SparseBinaryMatrix {
        let rows = self.rows();
        SparseBinaryMatrix::from_csr(rows, self.cols, self.row_ptr, self.row_idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn views_agree() {
        let m = SparseBinaryMatrix::from_rows(&[vec![2, 0], vec![1], vec![0, 1, 2]], 3).unwrap();
        assert_eq!(m.row(0), &[0, 2]);
        assert_eq!(m.col(0), &[0, 2]);
        assert_eq!(m.col(1), &[1, 2]);
        assert_eq!(m.edges(), 6);
        assert!(m.get(2, 1) && !m.get(1, 0));
        assert!(m.is_consistent());
    }

    #[test]
    fn duplicate_rejected_with_position() {
        let err = SparseBinaryMatrix::from_rows(&[vec![0], vec![3, 1, 3]], 4).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { row: 1, col: 3 }));
        assert!(SparseBinaryMatrix::from_rows(&[vec![4]], 4).is_err());
    }

    #[test]
    fn truncate_rejects_dangling_entries() {
        let m = SparseBinaryMatrix::from_rows(&[vec![0, 1], vec![0, 3]], 4).unwrap();
        let t = m.truncate(1, 2).unwrap();
        assert_eq!((t.rows(), t.cols(), t.edges()), (1, 2, 2));
        assert!(m.truncate(2, 3).is_err());
    }

    proptest! {
        #[test]
        fn transpose_consistency(rows in proptest::collection::vec(
            proptest::collection::btree_set(0u32..30, 0..8), 0..20)) {
            let rows: Vec<Vec<u32>> = rows.into_iter().map(|s| s.into_iter().collect()).collect();
            let m = SparseBinaryMatrix::from_rows(&rows, 30).unwrap();
            prop_assert!(m.is_consistent());
            let col_total: usize = (0..30).map(|c| m.col_weight(c)).sum();
            prop_assert_eq!(col_total, m.edges());
            for (r, c) in m.iter_edges() {
                prop_assert!(m.col(c).contains(&(r as u32)));
            }
        }
    }
}
