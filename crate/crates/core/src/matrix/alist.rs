//! MacKay alist format.
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! <N column degrees>
//! <M row degrees>
//! <N lines: 1-indexed rows of each column>
//! <M lines: 1-indexed columns of each row>
//! ```
//!
//! Zero entries (padding) are ignored on read and never written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{RowBuilder, SparseBinaryMatrix};
use crate::{Error, Result};

/// Serialises `h` into alist text.
pub fn to_alist_string(h: &SparseBinaryMatrix) -> String {
    let mut out = Vec::new();
    write_alist_to(h, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("alist is ASCII")
}

fn write_list<W: Write>(w: &mut W, items: impl Iterator<Item = usize>) -> std::io::Result<()> {
    let mut first = true;
    for x in items {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        write!(w, "{x}")?;
    }
    w.write_all(b"\n")
}

pub fn write_alist_to<W: Write>(h: &SparseBinaryMatrix, w: &mut W) -> std::io::Result<()> {
    let (n, m) = (h.cols(), h.rows());
    let max_col = (0..n).map(|c| h.col_weight(c)).max().unwrap_or(0);
    let max_row = (0..m).map(|r| h.row_weight(r)).max().unwrap_or(0);
    writeln!(w, "{n} {m}")?;
    writeln!(w, "{max_col} {max_row}")?;
    write_list(w, (0..n).map(|c| h.col_weight(c)))?;
    write_list(w, (0..m).map(|r| h.row_weight(r)))?;
    for c in 0..n {
        write_list(w, h.col(c).iter().map(|&r| r as usize + 1))?;
    }
    for r in 0..m {
        write_list(w, h.row(r).iter().map(|&c| c as usize + 1))?;
    }
    Ok(())
}

pub fn write_alist(h: &SparseBinaryMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_alist_to(h, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_alist(path: &Path) -> Result<SparseBinaryMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_alist(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("bad number {t:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

/// Parses alist text. Row and column sections must describe the same edges.
pub fn parse_alist(text: &str) -> Result<SparseBinaryMatrix> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let err = |line: usize, message: String| Error::Parse { line, message };
    let (l, header) = lines.next_numbers("header")?;
    let [n, m] = header[..] else {
        return Err(err(l, "header must be \"N M\"".into()));
    };
    let (l, maxes) = lines.next_numbers("max degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(l, "expected two max degrees".into()));
    };
    // Degree lists may be wrapped over several lines.
    let mut read_counts = |count: usize, what: &str| -> Result<Vec<usize>> {
        let mut v = Vec::with_capacity(count);
        while v.len() < count {
            let (l, nums) = lines.next_numbers(what)?;
            if v.len() + nums.len() > count {
                return Err(err(l, format!("too many {what}")));
            }
            v.extend(nums);
        }
        Ok(v)
    };
    let col_deg = read_counts(n, "column degrees")?;
    let row_deg = read_counts(m, "row degrees")?;
    if let Some(&d) = col_deg.iter().find(|&&d| d > max_col) {
        return Err(err(2, format!("column degree {d} exceeds max {max_col}")));
    }
    if let Some(&d) = row_deg.iter().find(|&&d| d > max_row) {
        return Err(err(2, format!("row degree {d} exceeds max {max_row}")));
    }
    let mut col_lists = Vec::with_capacity(n);
    for c in 0..n {
        let (l, nums) = lines.next_numbers("column adjacency")?;
        let list: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
        if list.len() != col_deg[c] {
            return Err(err(l, format!("column {} lists {} rows, degree says {}", c + 1, list.len(), col_deg[c])));
        }
        if let Some(&x) = list.iter().find(|&&x| x > m) {
            return Err(err(l, format!("row index {x} out of range")));
        }
        col_lists.push(list);
    }
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
    for r in 0..m {
        let (l, nums) = lines.next_numbers("row adjacency")?;
        let list: Vec<u32> = nums.into_iter().filter(|&x| x != 0).map(|x| x as u32 - 1).collect();
        if list.len() != row_deg[r] {
            return Err(err(l, format!("row {} lists {} columns, degree says {}", r + 1, list.len(), row_deg[r])));
        }
        if let Some(&x) = list.iter().find(|&&x| x as usize >= n) {
            return Err(err(l, format!("column index {} out of range", x + 1)));
        }
        rows.push(list);
    }
    let mut b = RowBuilder::new(n);
    for row in &rows {
        b.push_row(row)?;
    }
    let h = b.finish();
    for (c, list) in col_lists.iter().enumerate() {
        let mut sorted: Vec<u32> = list.iter().map(|&x| x as u32 - 1).collect();
        sorted.sort_unstable();
        if sorted != h.col(c) {
            return Err(Error::invalid(format!(
                "column {} adjacency disagrees with row section",
                c + 1
            )));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseBinaryMatrix {
        SparseBinaryMatrix::from_rows(&[vec![0, 1, 3], vec![1, 2], vec![0, 2, 3]], 4).unwrap()
    }

    #[test]
    fn round_trip() {
        let h = small();
        let text = to_alist_string(&h);
        assert!(text.starts_with("4 3\n2 3\n"));
        assert_eq!(parse_alist(&text).unwrap(), h);
    }

    #[test]
    fn zero_padding_ignored() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let h = parse_alist(text).unwrap();
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = to_alist_string(&small());
        let cut: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        match parse_alist(&cut) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_edge_reported() {
        let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 1\n";
        assert!(matches!(parse_alist(text), Err(Error::DuplicateEdge { row: 0, col: 0 })));
    }

    #[test]
    fn inconsistent_sections_rejected() {
        let text = "2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n";
        assert!(matches!(parse_alist(text), Err(Error::InvalidInput(_))));
    }
}
