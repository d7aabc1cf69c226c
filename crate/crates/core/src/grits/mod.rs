//! Grid table similarity (GriTS).
//!
//! For a ground-truth grid `A` and a predicted grid `B`,
//!
//! ```text
//! GriTS_f(A, B) = 2 * sum f(A'[i,j], B'[i,j]) / (|A| + |B|)
//! ```
//!
//! where `A'` and `B'` are the sub-grids selected by monotone row and column
//! alignments and `f` is a cell similarity in `[0, 1]`. The numerator is a
//! real-valued true-positive mass (`tp`), which is what corpus aggregation
//! and set matching consume.
//!
//! Two cell similarities are provided:
//!
//! * `Top`: IoU of the two cells' footprints, each expressed relative to the
//!   grid position being compared.
//! * `Con`: `2 * LCS / (len_a + len_b)` over the characters of the normalized
//!   cell texts (1 when both are empty).

mod align;

use alloc::vec::Vec;

pub use align::{
    align_2d_exact, align_2d_exact_by, align_2d_factored, align_2d_factored_by, align_sequences,
    alignment_tp, co_optimal_maps, monotone_maps, OracleLimitExceeded, DEFAULT_ORACLE_LIMIT,
    MAX_TIED_MAPS,
};

use crate::table::{CellSpan, TableGrid};
use crate::text::{lcs_len, normalize_text};

/// Cell comparison criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    /// Topology: relative footprint of the logical cell.
    Top,
    /// Content: text of the logical cell.
    Con,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::Top, Criterion::Con];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Top => "top",
            Criterion::Con => "con",
        }
    }
}

/// Character-level LCS similarity of two (already normalized) texts.
pub fn cell_sim_con(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    lcs_similarity(&a, &b)
}

fn lcs_similarity(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(a, b) as f64 / total as f64
}

/// IoU of two footprints, each taken relative to its own grid position.
pub fn cell_sim_top(
    a: &CellSpan,
    a_pos: (usize, usize),
    b: &CellSpan,
    b_pos: (usize, usize),
) -> f64 {
    let rel = |span: &CellSpan, (row, col): (usize, usize)| {
        let r0 = span.row_start as isize - row as isize;
        let c0 = span.col_start as isize - col as isize;
        (
            r0,
            r0 + span.row_count() as isize,
            c0,
            c0 + span.col_count() as isize,
        )
    };
    let (ar0, ar1, ac0, ac1) = rel(a, a_pos);
    let (br0, br1, bc0, bc1) = rel(b, b_pos);
    let h = (ar1.min(br1) - ar0.max(br0)).max(0);
    let w = (ac1.min(bc1) - ac0.max(bc0)).max(0);
    let inter = (h * w) as f64;
    let union = (a.area() + b.area()) as f64 - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Monotone row and column alignment with its true-positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment2D {
    /// `(gt_row, pred_row)` pairs, strictly increasing in both components.
    pub row_map: Vec<(usize, usize)>,
    /// `(gt_col, pred_col)` pairs, strictly increasing in both components.
    pub col_map: Vec<(usize, usize)>,
    pub tp_score: f64,
}

impl Alignment2D {
    pub fn empty() -> Self {
        Self {
            row_map: Vec::new(),
            col_map: Vec::new(),
            tp_score: 0.0,
        }
    }

    /// Both maps are strictly increasing in both coordinates.
    pub fn is_monotone(&self) -> bool {
        let strictly =
            |m: &[(usize, usize)]| m.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        strictly(&self.row_map) && strictly(&self.col_map)
    }
}

/// Result of comparing one ground-truth grid with one predicted grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GritsResult {
    pub criterion: Criterion,
    pub tp: f64,
    pub size_gt: usize,
    pub size_pred: usize,
    pub score: f64,
}

impl GritsResult {
    pub fn new(criterion: Criterion, tp: f64, size_gt: usize, size_pred: usize) -> Self {
        let denom = size_gt + size_pred;
        // Two empty grids are identical.
        let score = if denom == 0 {
            1.0
        } else {
            2.0 * tp / denom as f64
        };
        Self {
            criterion,
            tp,
            size_gt,
            size_pred,
            score,
        }
    }

    /// A ground-truth table with no matched prediction.
    pub fn unmatched_gt(criterion: Criterion, size_gt: usize) -> Self {
        Self::new(criterion, 0.0, size_gt, 0)
    }

    /// A predicted table with no ground-truth counterpart.
    pub fn unmatched_pred(criterion: Criterion, size_pred: usize) -> Self {
        Self::new(criterion, 0.0, 0, size_pred)
    }
}

/// Memoized cell similarity between two fixed grids.
pub(crate) struct CellScorer<'a> {
    gt: &'a TableGrid,
    pred: &'a TableGrid,
    criterion: Criterion,
    gt_text: Vec<Vec<char>>,
    pred_text: Vec<Vec<char>>,
    memo: Vec<f64>,
}

/// Above this many logical-cell pairs the content memo is skipped.
const MEMO_LIMIT: usize = 1 << 24;

impl<'a> CellScorer<'a> {
    pub(crate) fn new(gt: &'a TableGrid, pred: &'a TableGrid, criterion: Criterion) -> Self {
        let chars = |g: &TableGrid| -> Vec<Vec<char>> {
            g.cells()
                .iter()
                .map(|c| normalize_text(&c.text).chars().collect())
                .collect()
        };
        let (gt_text, pred_text, memo) = match criterion {
            Criterion::Top => (Vec::new(), Vec::new(), Vec::new()),
            Criterion::Con => {
                let pairs = gt.cells().len() * pred.cells().len();
                let memo = if pairs <= MEMO_LIMIT {
                    alloc::vec![f64::NAN; pairs]
                } else {
                    Vec::new()
                };
                (chars(gt), chars(pred), memo)
            }
        };
        Self {
            gt,
            pred,
            criterion,
            gt_text,
            pred_text,
            memo,
        }
    }

    pub(crate) fn score(&mut self, gt_pos: (usize, usize), pred_pos: (usize, usize)) -> f64 {
        let gi = self.gt.cell_index(gt_pos.0, gt_pos.1);
        let pi = self.pred.cell_index(pred_pos.0, pred_pos.1);
        match self.criterion {
            Criterion::Top => cell_sim_top(
                &self.gt.cells()[gi].span,
                gt_pos,
                &self.pred.cells()[pi].span,
                pred_pos,
            ),
            Criterion::Con => {
                if self.memo.is_empty() {
                    return lcs_similarity(&self.gt_text[gi], &self.pred_text[pi]);
                }
                let key = gi * self.pred.cells().len() + pi;
                let cached = self.memo[key];
                if !cached.is_nan() {
                    return cached;
                }
                let v = lcs_similarity(&self.gt_text[gi], &self.pred_text[pi]);
                self.memo[key] = v;
                v
            }
        }
    }
}

/// GriTS of a predicted grid against a ground-truth grid.
pub fn grits(gt: &TableGrid, pred: &TableGrid, criterion: Criterion) -> GritsResult {
    grits_with_alignment(gt, pred, criterion).0
}

/// Like [`grits`], also returning the alignment that produced the score.
pub fn grits_with_alignment(
    gt: &TableGrid,
    pred: &TableGrid,
    criterion: Criterion,
) -> (GritsResult, Alignment2D) {
    let alignment = align_2d_factored(gt, pred, criterion);
    let result = GritsResult::new(criterion, alignment.tp_score, gt.size(), pred.size());
    (result, alignment)
}
