use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::ToPrimitive;

use super::{BlockLayout, RlLdpcCode, RowBuilder, SparseBinaryMatrix};
use crate::ensemble::Fraction;

/// Longest cycle length the girth search looks for.
pub const GIRTH_SEARCH_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEdges {
    pub ab: usize,
    /// Typed-column edges of all identity-paired rows (CD plus any extension).
    pub cd: usize,
    pub identity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub rows: usize,
    pub cols: usize,
    pub edges: usize,
    pub rate: Fraction,
    pub layout: BlockLayout,
    pub blocks: BlockEdges,
    pub row_degrees: BTreeMap<usize, usize>,
    pub col_degrees: BTreeMap<usize, usize>,
    /// Shortest cycle in the AB block, `None` if longer than the search limit.
    pub ab_girth: Option<usize>,
    /// Shortest cycle of the whole matrix when requested.
    pub girth: Option<Option<usize>>,
    /// Kept rows with an entry at or beyond `cols`; always zero for valid matrices.
    pub dangling_edges: usize,
}

impl StatsReport {
    pub fn max_row_degree(&self) -> usize {
        self.row_degrees.keys().next_back().copied().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        self.col_degrees.keys().next_back().copied().unwrap_or(0)
    }
}

fn fmt_hist(h: &BTreeMap<usize, usize>) -> String {
    h.iter()
        .map(|(d, n)| format!("{d}:{n}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn fmt_girth(g: Option<usize>) -> String {
    match g {
        Some(g) => g.to_string(),
        None => format!(">{GIRTH_SEARCH_LIMIT}"),
    }
}

impl fmt::Display for StatsReport {
    /// `key=value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows={}", self.rows)?;
        writeln!(f, "cols={}", self.cols)?;
        writeln!(f, "edges={}", self.edges)?;
        writeln!(f, "rate={}", self.rate.to_f64().unwrap_or(f64::NAN))?;
        writeln!(f, "rate_exact={}", self.rate)?;
        writeln!(f, "ab_rows={}", self.layout.ab_rows)?;
        writeln!(f, "cd_rows={}", self.layout.cd_rows)?;
        writeln!(f, "typed_cols={}", self.layout.typed_cols)?;
        writeln!(f, "identity_cols={}", self.layout.identity_cols)?;
        writeln!(f, "ab_edges={}", self.blocks.ab)?;
        writeln!(f, "cd_edges={}", self.blocks.cd)?;
        writeln!(f, "identity_edges={}", self.blocks.identity)?;
        writeln!(f, "max_row_degree={}", self.max_row_degree())?;
        writeln!(f, "max_col_degree={}", self.max_col_degree())?;
        writeln!(f, "row_degree_hist={}", fmt_hist(&self.row_degrees))?;
        writeln!(f, "col_degree_hist={}", fmt_hist(&self.col_degrees))?;
        writeln!(f, "ab_girth={}", fmt_girth(self.ab_girth))?;
        if let Some(g) = self.girth {
            writeln!(f, "girth={}", fmt_girth(g))?;
        }
        writeln!(f, "dangling_edges={}", self.dangling_edges)
    }
}

/// Dimensions, rate, block edge counts, degree histograms and girth bounds.
pub fn matrix_stats(code: &RlLdpcCode, full_girth: bool) -> StatsReport {
    let h = &code.matrix;
    let layout = code.layout;
    let mut blocks = BlockEdges {
        ab: 0,
        cd: 0,
        identity: 0,
    };
    let mut dangling = 0;
    for (r, c) in h.iter_edges() {
        if c >= layout.typed_cols {
            blocks.identity += 1;
        } else if r < layout.ab_rows {
            blocks.ab += 1;
        } else {
            blocks.cd += 1;
        }
        if c >= h.cols() {
            dangling += 1;
        }
    }
    let mut row_degrees = BTreeMap::new();
    for r in 0..h.rows() {
        *row_degrees.entry(h.row_weight(r)).or_insert(0) += 1;
    }
    let mut col_degrees = BTreeMap::new();
    for c in 0..h.cols() {
        *col_degrees.entry(h.col_weight(c)).or_insert(0) += 1;
    }
    let ab_girth = if layout.ab_rows > 0 && layout.typed_cols > 0 {
        let mut b = RowBuilder::new(layout.typed_cols);
        for r in 0..layout.ab_rows {
            b.push_sorted_unchecked(h.row(r));
        }
        girth_up_to(&b.finish(), GIRTH_SEARCH_LIMIT)
    } else {
        None
    };
    let rate = if h.cols() > 0 {
        Fraction::new(h.cols() as i128 - h.rows() as i128, h.cols() as i128)
    } else {
        Fraction::from_integer(0)
    };
    StatsReport {
        rows: h.rows(),
        cols: h.cols(),
        edges: h.edges(),
        rate,
        layout,
        blocks,
        row_degrees,
        col_degrees,
        ab_girth,
        girth: full_girth.then(|| girth_up_to(h, GIRTH_SEARCH_LIMIT)),
        dangling_edges: dangling,
    }
}

/// Length of the shortest cycle of the Tanner graph if it is at most
/// `max_len`, found by depth-bounded BFS from every variable node.
pub fn girth_up_to(h: &SparseBinaryMatrix, max_len: usize) -> Option<usize> {
    let n = h.cols();
    let total = n + h.rows();
    // Nodes: variables 0..n, checks n..n+m.
    let mut dist = vec![u32::MAX; total];
    let mut parent = vec![u32::MAX; total];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    let mut best = usize::MAX;
    for start in 0..n {
        if h.col_weight(start) < 2 {
            continue;
        }
        let limit = best.min(max_len + 1);
        for &t in &touched {
            dist[t as usize] = u32::MAX;
            parent[t as usize] = u32::MAX;
        }
        touched.clear();
        queue.clear();
        dist[start] = 0;
        touched.push(start as u32);
        queue.push_back(start as u32);
        'bfs: while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize] as usize;
            if 2 * dx + 1 >= limit {
                break;
            }
            let neighbours: Box<dyn Iterator<Item = u32>> = if (x as usize) < n {
                Box::new(h.col(x as usize).iter().map(|&r| r + n as u32))
            } else {
                Box::new(h.row(x as usize - n).iter().copied())
            };
            for y in neighbours {
                if y == parent[x as usize] {
                    continue;
                }
                let dy = dist[y as usize];
                if dy == u32::MAX {
                    dist[y as usize] = dx as u32 + 1;
                    parent[y as usize] = x;
                    touched.push(y);
                    queue.push_back(y);
                } else {
                    let len = dx + dy as usize + 1;
                    if len < best {
                        best = len;
                    }
                    if best <= 4 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 4 {
            break;
        }
    }
    (best <= max_len).then_some(best)
}
