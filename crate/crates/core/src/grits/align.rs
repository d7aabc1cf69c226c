//! Monotone sub-grid alignment.
//!
//! The factored heuristic aligns one axis first, scoring each index pair by
//! a 1D alignment along the other axis, then aligns the other axis exactly
//! given that map. Several starting maps are completed this way and each is
//! improved by alternating exact re-alignment of rows and columns.
//! The exhaustive oracle enumerates every pair of monotone maps and is only
//! usable on small grids.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{Alignment2D, CellScorer, Criterion};
use crate::table::TableGrid;

/// Default bound on rows and columns accepted by the exhaustive oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("grid dimension {found} exceeds the oracle limit {limit}")]
pub struct OracleLimitExceeded {
    pub found: usize,
    pub limit: usize,
}

/// Suffix optima: `best[i * (m + 1) + j]` is the best gain using indices
/// `>= i` on the first side and `>= j` on the second.
fn suffix_best(gains: &[f64], n: usize, m: usize) -> Vec<f64> {
    debug_assert_eq!(gains.len(), n * m);
    let width = m + 1;
    let mut best = vec![0.0f64; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let take = gains[i * m + j] + best[(i + 1) * width + j + 1];
            let skip = best[(i + 1) * width + j].max(best[i * width + j + 1]);
            best[i * width + j] = take.max(skip);
        }
    }
    best
}

/// Maximum-gain monotone alignment of two sequences.
///
/// `gains` is row-major `n x m`; entries must be non-negative. Among optimal
/// maps the lexicographically smallest one is returned.
pub fn align_sequences(gains: &[f64], n: usize, m: usize) -> (Vec<(usize, usize)>, f64) {
    let width = m + 1;
    let best = suffix_best(gains, n, m);
    let mut map = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let target = best[i * width + j];
        if target == 0.0 {
            break;
        }
        // First pair in lexicographic order that continues an optimum.
        let next = (i..n)
            .flat_map(|a| (j..m).map(move |b| (a, b)))
            .find(|&(a, b)| gains[a * m + b] + best[(a + 1) * width + b + 1] == target);
        match next {
            Some((a, b)) => {
                map.push((a, b));
                i = a + 1;
                j = b + 1;
            }
            None => unreachable!("optimum has a witness pair"),
        }
    }
    (map, best[0])
}

fn near(x: f64, target: f64) -> bool {
    (x - target).abs() <= TIE_TOLERANCE * target.abs().max(1.0)
}

/// Relative tolerance under which two alignment values count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// Maximum number of tied column maps compared in the second phase.
pub const MAX_TIED_MAPS: usize = 64;

/// Optimal maps made of positive-gain pairs, in lexicographic order, at most
/// `cap` of them. Values within a relative `1e-9` of the optimum count as
/// optimal.
pub fn co_optimal_maps(gains: &[f64], n: usize, m: usize, cap: usize) -> Vec<Vec<(usize, usize)>> {
    struct Search<'a> {
        gains: &'a [f64],
        best: Vec<f64>,
        n: usize,
        m: usize,
        cap: usize,
        out: Vec<Vec<(usize, usize)>>,
    }
    impl Search<'_> {
        fn at(&self, i: usize, j: usize) -> f64 {
            self.best[i * (self.m + 1) + j]
        }

        fn walk(&mut self, i: usize, j: usize, current: &mut Vec<(usize, usize)>) {
            if self.out.len() >= self.cap {
                return;
            }
            let target = self.at(i, j);
            if near(0.0, target) {
                self.out.push(current.clone());
                return;
            }
            for a in i..self.n {
                for b in j..self.m {
                    let g = self.gains[a * self.m + b];
                    if g > 0.0 && near(g + self.at(a + 1, b + 1), target) {
                        current.push((a, b));
                        self.walk(a + 1, b + 1, current);
                        current.pop();
                        if self.out.len() >= self.cap {
                            return;
                        }
                    }
                }
            }
        }
    }
    let mut search = Search {
        gains,
        best: suffix_best(gains, n, m),
        n,
        m,
        cap,
        out: Vec::new(),
    };
    search.walk(0, 0, &mut Vec::new());
    if search.out.is_empty() {
        search.out.push(Vec::new());
    }
    search.out
}

/// Optimal value of a monotone alignment, without the map.
fn align_value(n: usize, m: usize, mut gain: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut prev = vec![0.0f64; m + 1];
    let mut curr = vec![0.0f64; m + 1];
    for i in 0..n {
        for j in 0..m {
            let take = prev[j] + gain(i, j);
            curr[j + 1] = take.max(prev[j + 1]).max(curr[j]);
        }
        core::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// True-positive mass of a pair of maps, summed row-major over the maps.
///
/// Both the heuristic and the oracle report their score through this sum so
/// that equal alignments produce bit-identical scores.
pub fn alignment_tp(
    row_map: &[(usize, usize)],
    col_map: &[(usize, usize)],
    mut score: impl FnMut((usize, usize), (usize, usize)) -> f64,
) -> f64 {
    let mut tp = 0.0;
    for &(gr, pr) in row_map {
        for &(gc, pc) in col_map {
            tp += score((gr, gc), (pr, pc));
        }
    }
    tp
}

/// Best map along one axis given a fixed map along the other.
///
/// With `rows_fixed`, `fixed` is a row map and columns are aligned;
/// otherwise `fixed` is a column map and rows are aligned.
fn align_given(
    fixed: &[(usize, usize)],
    rows_fixed: bool,
    n: usize,
    m: usize,
    gains: &mut Vec<f64>,
    score: &mut impl FnMut((usize, usize), (usize, usize)) -> f64,
) -> Vec<(usize, usize)> {
    gains.clear();
    for g in 0..n {
        for p in 0..m {
            let mut total = 0.0;
            for &(fg, fp) in fixed {
                total += if rows_fixed {
                    score((fg, g), (fp, p))
                } else {
                    score((g, fg), (p, fp))
                };
            }
            gains.push(total);
        }
    }
    align_sequences(gains, n, m).0
}

/// Upper bound on re-alignment rounds per starting point.
const MAX_REFINE_ROUNDS: usize = 16;

/// Local search state shared by all starting points of one search.
struct Climber<'s, F> {
    gt_shape: (usize, usize),
    pred_shape: (usize, usize),
    score: &'s mut F,
    gains: Vec<f64>,
    /// Column maps already expanded; their continuation is known.
    seen: BTreeSet<Vec<(usize, usize)>>,
    best: Option<Alignment2D>,
}

impl<F: FnMut((usize, usize), (usize, usize)) -> f64> Climber<'_, F> {
    /// Alternates exact row and column alignment from a column map while the
    /// score strictly improves.
    fn climb(&mut self, mut col_map: Vec<(usize, usize)>) {
        let mut last = f64::NEG_INFINITY;
        for _ in 0..MAX_REFINE_ROUNDS {
            if !self.seen.insert(col_map.clone()) {
                return;
            }
            let (g_rows, g_cols) = self.gt_shape;
            let (p_rows, p_cols) = self.pred_shape;
            let row_map = align_given(&col_map, false, g_rows, p_rows, &mut self.gains, self.score);
            let tp_score = alignment_tp(&row_map, &col_map, &mut *self.score);
            if tp_score <= last {
                return;
            }
            last = tp_score;
            let next = align_given(&row_map, true, g_cols, p_cols, &mut self.gains, self.score);
            if self.best.as_ref().is_none_or(|b| tp_score > b.tp_score) {
                self.best = Some(Alignment2D {
                    row_map,
                    col_map,
                    tp_score,
                });
            }
            col_map = next;
        }
    }

    /// Starts from a row map by first aligning columns exactly.
    fn climb_from_rows(&mut self, row_map: &[(usize, usize)]) {
        let col_map = align_given(
            row_map,
            true,
            self.gt_shape.1,
            self.pred_shape.1,
            &mut self.gains,
            self.score,
        );
        self.climb(col_map);
    }
}

/// Diagonal maps `i -> i + offset` between `0..n` and `0..m` whose offset
/// keeps the shorter side fully inside the longer one, plus one offset past
/// each end of that range.
fn diagonals(n: usize, m: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let lo = -(n.saturating_sub(m) as isize) - 1;
    let hi = m.saturating_sub(n) as isize + 1;
    (lo..=hi).filter_map(move |offset| {
        let map: Vec<(usize, usize)> = (0..n)
            .filter_map(|i| {
                let j = i as isize + offset;
                (0..m as isize).contains(&j).then_some((i, j as usize))
            })
            .collect();
        (!map.is_empty()).then_some(map)
    })
}

/// One orientation of the heuristic.
fn factored_search(
    gt_shape: (usize, usize),
    pred_shape: (usize, usize),
    score: &mut impl FnMut((usize, usize), (usize, usize)) -> f64,
) -> Alignment2D {
    let (g_rows, g_cols) = gt_shape;
    let (p_rows, p_cols) = pred_shape;
    let first_phase =
        |columns_first: bool, score: &mut dyn FnMut((usize, usize), (usize, usize)) -> f64| {
            let (n_outer, m_outer, n_inner, m_inner) = if columns_first {
                (g_cols, p_cols, g_rows, p_rows)
            } else {
                (g_rows, p_rows, g_cols, p_cols)
            };
            let mut outer_gains = vec![0.0; n_outer * m_outer];
            for go in 0..n_outer {
                for po in 0..m_outer {
                    outer_gains[go * m_outer + po] = align_value(n_inner, m_inner, |gi, pi| {
                        if columns_first {
                            score((gi, go), (pi, po))
                        } else {
                            score((go, gi), (po, pi))
                        }
                    });
                }
            }
            // Tied first-phase maps can disagree on which inner indices they
            // pair, so each one is a separate start.
            co_optimal_maps(&outer_gains, n_outer, m_outer, MAX_TIED_MAPS)
        };
    let col_seeds = first_phase(true, score);
    let row_seeds = first_phase(false, score);

    let mut climber = Climber {
        gt_shape,
        pred_shape,
        score,
        gains: Vec::new(),
        seen: BTreeSet::new(),
        best: None,
    };
    for col_map in col_seeds {
        climber.climb(col_map);
    }
    for row_map in &row_seeds {
        climber.climb_from_rows(row_map);
    }
    for col_map in diagonals(g_cols, p_cols) {
        climber.climb(col_map);
    }
    for row_map in diagonals(g_rows, p_rows) {
        climber.climb_from_rows(&row_map);
    }
    climber.best.unwrap_or_else(Alignment2D::empty)
}

/// Factored heuristic over grids of the given `(rows, cols)` shapes.
///
/// Starting maps for one axis are the tied optima of the first phase, where
/// an index pair is scored by a 1D alignment along the other axis, plus all
/// diagonal maps. Each start is completed by an exact alignment of the other
/// axis and refined. The search runs in both axis orders and both grid
/// orders, so the score is symmetric in the two grids. The best score wins;
/// ties keep the earliest candidate.
pub fn align_2d_factored_by(
    gt_shape: (usize, usize),
    pred_shape: (usize, usize),
    mut score: impl FnMut((usize, usize), (usize, usize)) -> f64,
) -> Alignment2D {
    if gt_shape.0 * gt_shape.1 == 0 || pred_shape.0 * pred_shape.1 == 0 {
        return Alignment2D::empty();
    }
    let forward = factored_search(gt_shape, pred_shape, &mut score);
    let backward = factored_search(pred_shape, gt_shape, &mut |p, g| score(g, p));
    if backward.tp_score > forward.tp_score {
        let flip = |map: Vec<(usize, usize)>| map.into_iter().map(|(p, g)| (g, p)).collect();
        Alignment2D {
            row_map: flip(backward.row_map),
            col_map: flip(backward.col_map),
            tp_score: backward.tp_score,
        }
    } else {
        forward
    }
}

/// Factored heuristic for a grid pair under a criterion.
pub fn align_2d_factored(gt: &TableGrid, pred: &TableGrid, criterion: Criterion) -> Alignment2D {
    let gt_shape = (gt.n_rows(), gt.n_cols());
    let pred_shape = (pred.n_rows(), pred.n_cols());
    let mut scorer = CellScorer::new(gt, pred, criterion);
    if gt.size() * pred.size() > DENSE_TABLE_LIMIT {
        return align_2d_factored_by(gt_shape, pred_shape, |g, p| scorer.score(g, p));
    }
    let (p_rows, p_cols) = pred_shape;
    let mut table = Vec::with_capacity(gt.size() * pred.size());
    for gr in 0..gt_shape.0 {
        for gc in 0..gt_shape.1 {
            for pr in 0..p_rows {
                for pc in 0..p_cols {
                    table.push(scorer.score((gr, gc), (pr, pc)));
                }
            }
        }
    }
    let width = pred.size();
    align_2d_factored_by(gt_shape, pred_shape, |(gr, gc), (pr, pc)| {
        table[(gr * gt_shape.1 + gc) * width + pr * p_cols + pc]
    })
}

/// Largest slot-pair count for which all similarities are tabulated.
const DENSE_TABLE_LIMIT: usize = 1 << 22;

/// Every monotone map between `0..n` and `0..m`, in lexicographic order.
pub fn monotone_maps(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(
        n: usize,
        m: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        out.push(current.clone());
        let (a0, b0) = current.last().map_or((0, 0), |&(a, b)| (a + 1, b + 1));
        for a in a0..n {
            for b in b0..m {
                current.push((a, b));
                extend(n, m, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(n, m, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive search over all monotone row and column maps.
///
/// Ties keep the first maximizer in (column map, row map) lexicographic
/// order.
pub fn align_2d_exact_by(
    gt_shape: (usize, usize),
    pred_shape: (usize, usize),
    limit: usize,
    mut score: impl FnMut((usize, usize), (usize, usize)) -> f64,
) -> Result<Alignment2D, OracleLimitExceeded> {
    let (g_rows, g_cols) = gt_shape;
    let (p_rows, p_cols) = pred_shape;
    let found = g_rows.max(g_cols).max(p_rows).max(p_cols);
    if found > limit {
        return Err(OracleLimitExceeded { found, limit });
    }

    let idx = |gr: usize, gc: usize, pr: usize, pc: usize| {
        ((gr * g_cols + gc) * p_rows + pr) * p_cols + pc
    };
    let mut table = vec![0.0; g_rows * g_cols * p_rows * p_cols];
    for gr in 0..g_rows {
        for gc in 0..g_cols {
            for pr in 0..p_rows {
                for pc in 0..p_cols {
                    table[idx(gr, gc, pr, pc)] = score((gr, gc), (pr, pc));
                }
            }
        }
    }

    let row_maps = monotone_maps(g_rows, p_rows);
    let col_maps = monotone_maps(g_cols, p_cols);
    let mut best: Option<(f64, usize, usize)> = None;
    for (ci, col_map) in col_maps.iter().enumerate() {
        for (ri, row_map) in row_maps.iter().enumerate() {
            let tp = alignment_tp(row_map, col_map, |(gr, gc), (pr, pc)| {
                table[idx(gr, gc, pr, pc)]
            });
            if best.is_none_or(|(b, _, _)| tp > b) {
                best = Some((tp, ci, ri));
            }
        }
    }
    let (tp_score, ci, ri) = best.expect("the empty map is always enumerated");
    Ok(Alignment2D {
        row_map: row_maps[ri].clone(),
        col_map: col_maps[ci].clone(),
        tp_score,
    })
}

/// Exhaustive oracle for a grid pair under a criterion.
pub fn align_2d_exact(
    gt: &TableGrid,
    pred: &TableGrid,
    criterion: Criterion,
    limit: usize,
) -> Result<Alignment2D, OracleLimitExceeded> {
    let mut scorer = CellScorer::new(gt, pred, criterion);
    align_2d_exact_by(
        (gt.n_rows(), gt.n_cols()),
        (pred.n_rows(), pred.n_cols()),
        limit,
        |g, p| scorer.score(g, p),
    )
}
