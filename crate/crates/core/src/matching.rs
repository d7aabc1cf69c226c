//! One-to-one matching between ground-truth and predicted table sets.
//!
//! Page- and document-level evaluation has no given correspondence between
//! tables. The assignment maximizing total true-positive mass is used, which
//! attributes one result to every ground-truth table. Predictions that fuse
//! several ground-truth tables are matched to at most one of them.

use alloc::vec::Vec;

use crate::assignment::max_weight_assignment;
use crate::grits::{grits, Criterion, GritsResult};
use crate::table::TableGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct TableSetMatch {
    pub criterion: Criterion,
    /// `(gt_index, pred_index)` pairs sorted by ground-truth index.
    pub assignment: Vec<(usize, usize)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    /// One result per ground-truth table, in ground-truth order.
    pub per_gt_results: Vec<GritsResult>,
    /// Sizes of the unmatched predictions, scored as pure false positives.
    pub unmatched_pred_results: Vec<GritsResult>,
}

impl TableSetMatch {
    /// Builds the match from a full `#gt x #pred` result matrix.
    pub fn from_results(
        criterion: Criterion,
        gt_sizes: &[usize],
        pred_sizes: &[usize],
        results: &[Vec<GritsResult>],
    ) -> Self {
        debug_assert_eq!(results.len(), gt_sizes.len());
        let gains: Vec<Vec<f64>> = results
            .iter()
            .map(|row| row.iter().map(|r| r.tp).collect())
            .collect();
        let assignment = if pred_sizes.is_empty() {
            Vec::new()
        } else {
            max_weight_assignment(&gains)
        };

        let mut pred_for_gt = alloc::vec![None; gt_sizes.len()];
        let mut pred_used = alloc::vec![false; pred_sizes.len()];
        for &(g, p) in &assignment {
            pred_for_gt[g] = Some(p);
            pred_used[p] = true;
        }
        let per_gt_results = gt_sizes
            .iter()
            .enumerate()
            .map(|(g, &size)| match pred_for_gt[g] {
                Some(p) => results[g][p],
                None => GritsResult::unmatched_gt(criterion, size),
            })
            .collect();
        let unmatched_gt = (0..gt_sizes.len())
            .filter(|&g| pred_for_gt[g].is_none())
            .collect();
        let unmatched_pred: Vec<usize> = (0..pred_sizes.len()).filter(|&p| !pred_used[p]).collect();
        let unmatched_pred_results = unmatched_pred
            .iter()
            .map(|&p| GritsResult::unmatched_pred(criterion, pred_sizes[p]))
            .collect();
        Self {
            criterion,
            assignment,
            unmatched_gt,
            unmatched_pred,
            per_gt_results,
            unmatched_pred_results,
        }
    }

    /// Prediction matched to a ground-truth table, if any.
    pub fn pred_for(&self, gt_index: usize) -> Option<usize> {
        self.assignment
            .iter()
            .find(|&&(g, _)| g == gt_index)
            .map(|&(_, p)| p)
    }

    /// Total true-positive mass, summed in ground-truth order.
    pub fn total_tp(&self) -> f64 {
        self.per_gt_results.iter().map(|r| r.tp).sum()
    }

    /// Results for the cell-level pseudo-F1: every ground-truth table plus
    /// every unmatched prediction.
    pub fn pseudo_f1_results(&self) -> impl Iterator<Item = &GritsResult> {
        self.per_gt_results
            .iter()
            .chain(&self.unmatched_pred_results)
    }
}

/// Computes all pairwise results and the optimal one-to-one matching.
pub fn match_table_sets(
    gt: &[TableGrid],
    pred: &[TableGrid],
    criterion: Criterion,
) -> TableSetMatch {
    let results: Vec<Vec<GritsResult>> = gt
        .iter()
        .map(|g| pred.iter().map(|p| grits(g, p, criterion)).collect())
        .collect();
    let gt_sizes: Vec<usize> = gt.iter().map(TableGrid::size).collect();
    let pred_sizes: Vec<usize> = pred.iter().map(TableGrid::size).collect();
    TableSetMatch::from_results(criterion, &gt_sizes, &pred_sizes, &results)
}
