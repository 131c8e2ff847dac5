//! Progressive edge growth with prescribed row and column weights.
//!
//! Columns are processed in the given order; each new edge of a column goes
//! to a check node outside the column's BFS neighbourhood (or the deepest
//! level that still leaves candidates), preferring the lowest current check
//! degree and then the lowest index. Only checks below their target weight
//! are eligible, so the output realises the row profile exactly.

use std::collections::BTreeSet;

pub(crate) struct Peg {
    row_targets: Vec<u32>,
    max_depth: usize,
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    /// Checks with spare capacity, bucketed by current degree.
    buckets: Vec<BTreeSet<u32>>,
    chk_mark: Vec<u32>,
    chk_level: Vec<u32>,
    var_mark: Vec<u32>,
    stamp: u32,
    open_checks: usize,
}

impl Peg {
    pub(crate) fn new(cols: usize, row_targets: Vec<u32>, max_depth: usize) -> Self {
        let max_target = row_targets.iter().copied().max().unwrap_or(0) as usize;
        let mut buckets = vec![BTreeSet::new(); max_target + 1];
        let mut open_checks = 0;
        for (c, &t) in row_targets.iter().enumerate() {
            if t > 0 {
                buckets[0].insert(c as u32);
                open_checks += 1;
            }
        }
        let rows = row_targets.len();
        Self {
            row_targets,
            max_depth,
            var_adj: vec![Vec::new(); cols],
            chk_adj: vec![Vec::new(); rows],
            buckets,
            chk_mark: vec![0; rows],
            chk_level: vec![0; rows],
            var_mark: vec![0; cols],
            stamp: 0,
            open_checks,
        }
    }

    fn has_capacity(&self, c: u32) -> bool {
        (self.chk_adj[c as usize].len() as u32) < self.row_targets[c as usize]
    }

    fn add_edge(&mut self, v: u32, c: u32) {
        let d = self.chk_adj[c as usize].len();
        self.buckets[d].remove(&c);
        self.chk_adj[c as usize].push(v);
        self.var_adj[v as usize].push(c);
        if d + 1 < self.row_targets[c as usize] as usize {
            self.buckets[d + 1].insert(c);
        } else {
            self.open_checks -= 1;
        }
    }

    fn remove_edge(&mut self, v: u32, c: u32) {
        let d = self.chk_adj[c as usize].len();
        if d < self.row_targets[c as usize] as usize {
            self.buckets[d].remove(&c);
        } else {
            self.open_checks += 1;
        }
        self.chk_adj[c as usize].retain(|&x| x != v);
        self.var_adj[v as usize].retain(|&x| x != c);
        self.buckets[d - 1].insert(c);
    }

    /// Lowest-degree, lowest-index open check accepted by `allowed`.
    fn pick(&self, allowed: impl Fn(u32) -> bool) -> Option<u32> {
        self.buckets
            .iter()
            .find_map(|b| b.iter().copied().find(|&c| allowed(c)))
    }

    /// Adds all `degree` edges of column `v`.
    pub(crate) fn grow_column(&mut self, v: u32, degree: u32) {
        for _ in 0..degree {
            let c = if self.var_adj[v as usize].is_empty() {
                self.pick(|_| true)
            } else {
                self.pick_by_bfs(v)
            };
            match c {
                Some(c) => self.add_edge(v, c),
                None => self.swap_in(v),
            }
        }
    }

    fn pick_by_bfs(&mut self, v: u32) -> Option<u32> {
        self.stamp += 1;
        let stamp = self.stamp;
        self.var_mark[v as usize] = stamp;
        let mut frontier: Vec<u32> = self.var_adj[v as usize].clone();
        let mut unreached_open = self.open_checks;
        for &c in &frontier {
            self.chk_mark[c as usize] = stamp;
            self.chk_level[c as usize] = 0;
            if self.has_capacity(c) {
                unreached_open -= 1;
            }
        }
        let mut level = 0u32;
        loop {
            if unreached_open == 0 || level as usize >= self.max_depth {
                break;
            }
            let mut next = Vec::new();
            let mut next_open = 0;
            for &c in &frontier {
                for &u in &self.chk_adj[c as usize] {
                    if self.var_mark[u as usize] == stamp {
                        continue;
                    }
                    self.var_mark[u as usize] = stamp;
                    for &c2 in &self.var_adj[u as usize] {
                        if self.chk_mark[c2 as usize] != stamp {
                            self.chk_mark[c2 as usize] = stamp;
                            self.chk_level[c2 as usize] = level + 1;
                            if self.has_capacity(c2) {
                                next_open += 1;
                            }
                            next.push(c2);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            if next_open == unreached_open {
                // Expansion would cover every open check: use the last level
                // that still left some outside.
                let lvl = level + 1;
                let (mark, lv) = (&self.chk_mark, &self.chk_level);
                return self.pick(|c| mark[c as usize] != stamp || lv[c as usize] == lvl);
            }
            unreached_open -= next_open;
            frontier = next;
            level += 1;
        }
        if unreached_open > 0 {
            let mark = &self.chk_mark;
            return self.pick(|c| mark[c as usize] != stamp);
        }
        // Every open check is already close; accept any non-neighbour.
        let adj = &self.var_adj[v as usize];
        self.pick(|c| !adj.contains(&c))
    }

    /// All open checks are neighbours of `v`: move an existing edge `(u, c2)`
    /// to `(u, c)` and connect `v` to `c2`, keeping every weight on target.
    fn swap_in(&mut self, v: u32) {
        let c = self
            .pick(|_| true)
            .expect("row targets must cover every column edge");
        for c2 in 0..self.chk_adj.len() as u32 {
            if self.var_adj[v as usize].contains(&c2) {
                continue;
            }
            let found = self.chk_adj[c2 as usize]
                .iter()
                .copied()
                .find(|&u| u != v && !self.var_adj[u as usize].contains(&c));
            if let Some(u) = found {
                self.remove_edge(u, c2);
                self.add_edge(u, c);
                self.add_edge(v, c2);
                return;
            }
        }
        panic!("no edge swap available for column {v}");
    }

    /// Consumes the builder, returning sorted column lists per row.
    pub(crate) fn into_rows(self) -> Vec<Vec<u32>> {
        let mut rows = self.chk_adj;
        for r in &mut rows {
            r.sort_unstable();
        }
        rows
    }
}

/// Runs PEG over columns in index order with the given weights.
pub(crate) fn peg_rows(col_degrees: &[u32], row_targets: Vec<u32>, max_depth: usize) -> Vec<Vec<u32>> {
    let total_cols: u64 = col_degrees.iter().map(|&d| d as u64).sum();
    let total_rows: u64 = row_targets.iter().map(|&d| d as u64).sum();
    assert_eq!(total_cols, total_rows, "socket counts must agree");
    let mut peg = Peg::new(col_degrees.len(), row_targets, max_depth);
    for (v, &d) in col_degrees.iter().enumerate() {
        peg.grow_column(v as u32, d);
    }
    peg.into_rows()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_realised_exactly() {
        let cols: Vec<u32> = [2u32; 30].iter().chain([3u32; 20].iter()).copied().collect();
        let rows: Vec<u32> = [4u32; 15].iter().chain([5u32; 12].iter()).copied().collect();
        let out = peg_rows(&cols, rows.clone(), 8);
        for (r, list) in out.iter().enumerate() {
            assert_eq!(list.len() as u32, rows[r]);
            assert!(list.windows(2).all(|w| w[0] < w[1]));
        }
        let mut col_w = vec![0u32; cols.len()];
        for list in &out {
            for &c in list {
                col_w[c as usize] += 1;
            }
        }
        assert_eq!(col_w, cols);
    }

    #[test]
    fn tight_instance_uses_swaps() {
        // 4 columns of weight 3 into 3 rows of weight 4: the complete graph.
        let out = peg_rows(&[3, 3, 3, 3], vec![4, 4, 4], 4);
        for list in &out {
            assert_eq!(list, &[0, 1, 2, 3]);
        }
    }
}
