//! Construction of the AB and CD blocks and assembly of the base matrix.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::peg::peg_rows;
use super::sparse::{RowBuilder, SparseBinaryMatrix};
use super::{BlockLayout, RlLdpcCode, Scale};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::{Error, Result};

/// Full-scale AB block: column weight counts.
pub const AB_COLS_W2: u64 = 22_500;
pub const AB_COLS_W3: u64 = 17_500;
/// Full-scale AB block: row weight counts.
pub const AB_ROWS_W3: u64 = 10_625;
pub const AB_ROWS_W7: u64 = 9_375;
/// Full-scale CD block: row weight counts (before the identity entry).
pub const CD_ROWS_W2: u64 = 600_000;
pub const CD_ROWS_W3: u64 = 360_000;
pub const CD_ROWS: u64 = 960_000;
/// Typed (high-degree) columns shared by AB and CD.
pub const TYPED_COLS: u64 = 40_000;
/// Type-2 edges per typed column.
pub const CD_COL_WEIGHT: u32 = 57;

/// Search depth for PEG in the AB block. Unbounded: with a cap of 6 the
/// weight-2 columns closed 8-column cycles at full scale, i.e. codewords of
/// weight about 8 * 58 that caused undetected frame errors.
pub const AB_PEG_DEPTH: usize = usize::MAX;

/// Surviving CD weight-3 fraction that the top rows approach: the rate-0.05
/// reference check mix `0.52 / (0.41 + 0.52)`.
const REFERENCE_W3_MIX: f64 = 52.0 / 93.0;
const BASE_W3_MIX: f64 = 0.375;

/// PEG-constructed `20000s x 40000s` AB block with weight-2 columns first.
pub fn build_ab(scale: Scale, seed: u64) -> Result<SparseBinaryMatrix> {
    let c_w2 = scale.apply("ab_cols_w2", AB_COLS_W2)?;
    let c_w3 = scale.apply("ab_cols_w3", AB_COLS_W3)?;
    let r_w3 = scale.apply("ab_rows_w3", AB_ROWS_W3)?;
    let r_w7 = scale.apply("ab_rows_w7", AB_ROWS_W7)?;
    let col_degrees: Vec<u32> = std::iter::repeat_n(2, c_w2)
        .chain(std::iter::repeat_n(3, c_w3))
        .collect();
    let mut row_targets: Vec<u32> = std::iter::repeat_n(3, r_w3)
        .chain(std::iter::repeat_n(7, r_w7))
        .collect();
    let mut rng = rng_from_seed(derive_seed(seed, &[stream::AB_BLOCK]));
    row_targets.shuffle(&mut rng);
    let mut rows = peg_rows(&col_degrees, row_targets, AB_PEG_DEPTH);
    break_four_cycles(&mut rows, &mut rng);
    SparseBinaryMatrix::from_rows(&rows, c_w2 + c_w3)
}

/// Attempts per repeated pair before giving up on it.
const FOUR_CYCLE_TRIES: usize = 1000;

fn others(row: &[u32], skip: u32) -> impl Iterator<Item = u32> + '_ {
    row.iter().copied().filter(move |&x| x != skip)
}

/// Removes 4-cycles left by PEG (its last edges sometimes have no open check
/// outside the column's two-hop neighbourhood). A column of a repeated pair
/// trades places with a column of a random other row; row and column weights
/// are unchanged and a trade is taken only if it creates no repeated pair.
fn break_four_cycles(rows: &mut [Vec<u32>], rng: &mut impl Rng) {
    let mut pairs = PairCounts::default();
    for row in rows.iter() {
        pairs.add_row(row, None);
    }
    let m = rows.len();
    if m < 2 {
        return;
    }
    for r1 in 0..m {
        let mut k = 0;
        while k < rows[r1].len() {
            let a = rows[r1][k];
            if others(&rows[r1], a).all(|o| pairs.count(a, o) <= 1) {
                k += 1;
                continue;
            }
            let mut done = false;
            for _ in 0..FOUR_CYCLE_TRIES {
                let r3 = rng.random_range(0..m);
                if r3 == r1 || rows[r3].contains(&a) {
                    continue;
                }
                let u = rows[r3][rng.random_range(0..rows[r3].len())];
                if rows[r1].contains(&u) {
                    continue;
                }
                pairs.remove(a, others(&rows[r1], a));
                pairs.remove(u, others(&rows[r3], u));
                let ok = others(&rows[r1], a).all(|o| !pairs.contains(u, o))
                    && others(&rows[r3], u).all(|o| !pairs.contains(a, o));
                if ok {
                    let i1 = rows[r1].iter().position(|&x| x == a).expect("a in r1");
                    let i3 = rows[r3].iter().position(|&x| x == u).expect("u in r3");
                    rows[r1][i1] = u;
                    rows[r3][i3] = a;
                    pairs.add(u, others(&rows[r1], u));
                    pairs.add(a, others(&rows[r3], a));
                    done = true;
                    break;
                }
                pairs.add(a, others(&rows[r1], a));
                pairs.add(u, others(&rows[r3], u));
            }
            if !done {
                log::warn!("4-cycle through AB row {r1} left in place");
            }
            k += 1;
        }
    }
    for row in rows.iter_mut() {
        row.sort_unstable();
    }
}

/// Weight-3 flags for CD rows, top to bottom.
///
/// The cumulative count of weight-3 rows among the top `t` fraction is
/// `t * F(t)`, where `F` is the surviving mix after cutting to that point:
/// it moves linearly in the resulting code rate from 0.375 at rate 0.02 to
/// the reference mix at rate 0.05, and stays there above.
pub fn cd_row_weights(rows: usize) -> Vec<u8> {
    let total_w3 = (rows as u64 * CD_ROWS_W3).div_ceil(CD_ROWS) as usize;
    let cumulative = |i: usize| -> usize {
        if i == rows {
            return total_w3;
        }
        let t = i as f64 / rows as f64;
        let rate = 20_000.0 / (40_000.0 + 960_000.0 * t);
        let mix = if rate >= 0.05 {
            REFERENCE_W3_MIX
        } else {
            BASE_W3_MIX + (rate - 0.02) / 0.03 * (REFERENCE_W3_MIX - BASE_W3_MIX)
        };
        ((t * mix * rows as f64).round() as usize).min(total_w3)
    };
    let mut prev = 0;
    (1..=rows)
        .map(|i| {
            let c = cumulative(i).max(prev);
            let w = if c > prev { 3 } else { 2 };
            prev = c;
            w
        })
        .collect()
}

/// Stratified random CD block: `960000s x 40000s`, every column of weight 57.
///
/// Sockets are enumerated row by row and cut into 57 strata of one socket per
/// column each; inside a stratum the columns are a seeded permutation. Each
/// column therefore has exactly one edge in every 1/57 of the row range, so
/// cutting bottom rows removes a near-proportional share of every column.
pub fn build_cd(scale: Scale, seed: u64) -> Result<SparseBinaryMatrix> {
    build_cd_avoiding(scale, seed, None)
}

/// [`build_cd`], additionally avoiding column pairs that already share an AB
/// row, so that no 4-cycle runs through both blocks where avoidable.
pub fn build_cd_avoiding(scale: Scale, seed: u64, ab: Option<&SparseBinaryMatrix>) -> Result<SparseBinaryMatrix> {
    let rows = scale.apply("cd_rows", CD_ROWS)?;
    let r_w2 = scale.apply("cd_rows_w2", CD_ROWS_W2)?;
    let r_w3 = scale.apply("cd_rows_w3", CD_ROWS_W3)?;
    let cols = scale.apply("typed_cols", TYPED_COLS)?;
    debug_assert_eq!(r_w2 + r_w3, rows);
    let weights = cd_row_weights(rows);
    debug_assert_eq!(weights.iter().filter(|&&w| w == 3).count(), r_w3);
    let mut pairs = PairCounts::default();
    if let Some(ab) = ab {
        if ab.cols() != cols {
            return Err(Error::invalid(format!("AB has {} columns, expected {cols}", ab.cols())));
        }
        for r in 0..ab.rows() {
            pairs.add_row(ab.row(r), None);
        }
    }
    let rows_list = stratified_rows(
        &weights,
        cols,
        CD_COL_WEIGHT as usize,
        derive_seed(seed, &[stream::CD_BLOCK]),
        pairs,
    )?;
    SparseBinaryMatrix::from_rows(&rows_list, cols)
}

/// Candidates examined while looking for a swap that creates no 4-cycle
/// before settling for one that only avoids duplicate entries.
const CYCLE_FREE_TRIES: usize = 20_000;

/// Multiset of column pairs that share a row.
#[derive(Default)]
pub(crate) struct PairCounts(HashMap<u64, u32>);

fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

impl PairCounts {
    fn contains(&self, a: u32, b: u32) -> bool {
        self.0.contains_key(&pair_key(a, b))
    }

    fn count(&self, a: u32, b: u32) -> u32 {
        self.0.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    /// Registers all pairs of `row`, skipping the column `except` if given.
    fn add_row(&mut self, row: &[u32], except: Option<u32>) {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i + 1..] {
                if Some(a) != except && Some(b) != except {
                    *self.0.entry(pair_key(a, b)).or_insert(0) += 1;
                }
            }
        }
    }

    fn add(&mut self, c: u32, others: impl Iterator<Item = u32>) {
        for o in others {
            *self.0.entry(pair_key(c, o)).or_insert(0) += 1;
        }
    }

    fn remove(&mut self, c: u32, others: impl Iterator<Item = u32>) {
        for o in others {
            let k = pair_key(c, o);
            if let Some(n) = self.0.get_mut(&k) {
                *n -= 1;
                if *n == 0 {
                    self.0.remove(&k);
                }
            }
        }
    }
}

/// Assigns `strata * cols` sockets (rows in order, `weights[r]` sockets each)
/// to columns, one per column per stratum, without duplicate entries in a row.
///
/// Rows are fixed top to bottom. A socket whose column repeats in its row, or
/// pairs with an earlier column of the row that already shares another row
/// (a 4-cycle), swaps columns with a socket of the same stratum first and of
/// the nearest strata after that. Swaps into already fixed rows keep those
/// rows free of duplicates and new 4-cycles. When no cycle-free swap turns up
/// within [`CYCLE_FREE_TRIES`] candidates, the first duplicate-free one is used.
pub(crate) fn stratified_rows(
    weights: &[u8],
    cols: usize,
    strata: usize,
    seed: u64,
    mut pairs: PairCounts,
) -> Result<Vec<Vec<u32>>> {
    let sockets: usize = weights.iter().map(|&w| w as usize).sum();
    if sockets != strata * cols {
        return Err(Error::invalid(format!(
            "row sockets {sockets} != {strata} x {cols} column sockets"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut socket_row = Vec::with_capacity(sockets);
    let mut row_start = Vec::with_capacity(weights.len() + 1);
    for (r, &w) in weights.iter().enumerate() {
        row_start.push(socket_row.len());
        socket_row.extend(std::iter::repeat_n(r as u32, w as usize));
    }
    row_start.push(socket_row.len());
    let mut socket_col: Vec<u32> = Vec::with_capacity(sockets);
    let mut perm: Vec<u32> = (0..cols as u32).collect();
    for _ in 0..strata {
        perm.shuffle(&mut rng);
        socket_col.extend_from_slice(&perm);
    }

    for r in 0..weights.len() {
        for i in row_start[r]..row_start[r + 1] {
            // columns already fixed in this row
            let placed = socket_col[row_start[r]..i].to_vec();
            let fits = |c: u32, pairs: &PairCounts| {
                !placed.contains(&c) && placed.iter().all(|&o| !pairs.contains(c, o))
            };
            let c = socket_col[i];
            if fits(c, &pairs) {
                pairs.add(c, placed.iter().copied());
                continue;
            }
            let home = i / cols;
            let order = (0..strata).flat_map(|d| {
                let lo = home.checked_sub(d);
                let hi = if d > 0 && home + d < strata { Some(home + d) } else { None };
                lo.into_iter().chain(hi)
            });
            let mut fallback = None;
            let mut chosen = None;
            let mut tries = 0;
            'search: for stratum in order {
                let base = stratum * cols;
                let offset = rng.random_range(0..cols);
                for k in 0..cols {
                    let j = base + (offset + k) % cols;
                    let r2 = socket_row[j] as usize;
                    if r2 == r {
                        continue;
                    }
                    let c2 = socket_col[j];
                    let other: Vec<u32> = (row_start[r2]..row_start[r2 + 1])
                        .filter(|&s| s != j)
                        .map(|s| socket_col[s])
                        .collect();
                    if placed.contains(&c2) || other.contains(&c) {
                        continue;
                    }
                    // rows below r are not fixed yet; their pairs are checked later
                    let cycle_free = fits(c2, &pairs)
                        && (r2 > r || other.iter().all(|&o| !pairs.contains(c, o)));
                    if cycle_free {
                        chosen = Some(j);
                        break 'search;
                    }
                    if fallback.is_none() {
                        fallback = Some(j);
                    }
                    tries += 1;
                    if tries >= CYCLE_FREE_TRIES && fallback.is_some() {
                        break 'search;
                    }
                }
            }
            let Some(j) = chosen.or(fallback) else {
                return Err(Error::invalid(format!(
                    "cannot place row {r} without duplicate entries"
                )));
            };
            let r2 = socket_row[j] as usize;
            let c2 = socket_col[j];
            if r2 < r {
                let other: Vec<u32> = (row_start[r2]..row_start[r2 + 1])
                    .filter(|&s| s != j)
                    .map(|s| socket_col[s])
                    .collect();
                pairs.remove(c2, other.iter().copied());
                pairs.add(c, other.iter().copied());
            }
            socket_col.swap(i, j);
            pairs.add(c2, placed.iter().copied());
        }
    }
    Ok((0..weights.len())
        .map(|r| {
            let mut v = socket_col[row_start[r]..row_start[r + 1]].to_vec();
            v.sort_unstable();
            v
        })
        .collect())
}

/// Concatenates `[AB Z; CD I]`; identity column `j` pairs with CD row `j`.
pub fn assemble_base(ab: &SparseBinaryMatrix, cd: &SparseBinaryMatrix) -> Result<RlLdpcCode> {
    if ab.cols() != cd.cols() {
        return Err(Error::invalid(format!(
            "AB has {} columns but CD has {}",
            ab.cols(),
            cd.cols()
        )));
    }
    let typed = ab.cols();
    let layout = BlockLayout {
        ab_rows: ab.rows(),
        cd_rows: cd.rows(),
        typed_cols: typed,
        identity_cols: cd.rows(),
    };
    let n = typed + cd.rows();
    let mut b = RowBuilder::with_capacity(n, ab.rows() + cd.rows(), ab.edges() + cd.edges() + cd.rows());
    for r in 0..ab.rows() {
        b.push_sorted_unchecked(ab.row(r));
    }
    let mut scratch = Vec::new();
    for r in 0..cd.rows() {
        scratch.clear();
        scratch.extend_from_slice(cd.row(r));
        scratch.push((typed + r) as u32);
        b.push_sorted_unchecked(&scratch);
    }
    Ok(RlLdpcCode {
        matrix: b.finish(),
        layout,
        ensemble_id: "r002".into(),
        seed: 0,
        adaptation: Vec::new(),
    })
}

/// Builds AB and CD at `scale` from `seed` and assembles the base code.
pub fn build_base(scale: Scale, seed: u64) -> Result<RlLdpcCode> {
    // Validate every count before the expensive PEG run.
    scale.check_all()?;
    let ab = build_ab(scale, seed)?;
    let cd = build_cd_avoiding(scale, seed, Some(&ab))?;
    let mut code = assemble_base(&ab, &cd)?;
    code.seed = seed;
    Ok(code)
}
