//! Corpus-level aggregation of per-table results.
//!
//! Two aggregations of GriTS are supported: the mean of per-table scores, and
//! a pseudo-F1 over all grid cells of the corpus where the summed
//! true-positive mass is divided by the total predicted cells (precision) and
//! the total ground-truth cells (recall). Sums run in input order with
//! compensated summation so reports do not depend on scheduling.

use crate::grits::{Criterion, GritsResult};
use crate::table::{grid_exact_match, TableGrid};
use crate::text::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("nothing to aggregate")]
    EmptyCorpus,
    #[error("label sequences differ in length ({gold} gold vs {predicted} predicted)")]
    LengthMismatch { gold: usize, predicted: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateMode {
    MeanPerTable,
    PseudoF1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateScore {
    pub mode: AggregateMode,
    /// Unset for [`AggregateMode::MeanPerTable`].
    pub precision: Option<f64>,
    /// Unset for [`AggregateMode::MeanPerTable`].
    pub recall: Option<f64>,
    /// The mean score in mean mode, the pseudo-F1 otherwise.
    pub f1: f64,
    pub n_gt_cells: usize,
    pub n_pred_cells: usize,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn cell_totals(results: &[GritsResult]) -> (usize, usize) {
    results
        .iter()
        .fold((0, 0), |(g, p), r| (g + r.size_gt, p + r.size_pred))
}

/// Mean of per-table scores.
pub fn aggregate_mean(results: &[GritsResult]) -> Result<AggregateScore, AggregateError> {
    if results.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }
    let sum: CompensatedSum = results.iter().map(|r| r.score).collect();
    let (n_gt_cells, n_pred_cells) = cell_totals(results);
    Ok(AggregateScore {
        mode: AggregateMode::MeanPerTable,
        precision: None,
        recall: None,
        f1: sum.value() / results.len() as f64,
        n_gt_cells,
        n_pred_cells,
    })
}

/// Pseudo-F1 over every grid cell of the corpus.
///
/// Unmatched predicted tables belong in `results` too (with `size_gt = 0`) so
/// that their cells count against precision.
pub fn aggregate_pseudo_f1(results: &[GritsResult]) -> Result<AggregateScore, AggregateError> {
    if results.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }
    let tp = results
        .iter()
        .map(|r| r.tp)
        .collect::<CompensatedSum>()
        .value();
    let (n_gt_cells, n_pred_cells) = cell_totals(results);
    let precision = ratio(tp, n_pred_cells as f64);
    let recall = ratio(tp, n_gt_cells as f64);
    // Equal to 2PR / (P + R), and 0 under the zero-denominator conventions.
    let f1 = ratio(2.0 * tp, (n_gt_cells + n_pred_cells) as f64);
    Ok(AggregateScore {
        mode: AggregateMode::PseudoF1,
        precision: Some(precision),
        recall: Some(recall),
        f1,
        n_gt_cells,
        n_pred_cells,
    })
}

/// Fraction of ground-truth tables whose prediction matches exactly.
pub fn exact_match_accuracy(
    pairs: &[(&TableGrid, Option<&TableGrid>)],
    criterion: Criterion,
) -> Result<f64, AggregateError> {
    if pairs.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }
    let hits = pairs
        .iter()
        .filter(|(gt, pred)| pred.is_some_and(|p| grid_exact_match(gt, p, criterion)))
        .count();
    Ok(hits as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryScores {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Precision, recall and F1 of the positive class.
pub fn binary_prf(gold: &[bool], predicted: &[bool]) -> Result<BinaryScores, AggregateError> {
    if gold.len() != predicted.len() {
        return Err(AggregateError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&g, &p) in gold.iter().zip(predicted) {
        match (g, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, (tp + fn_) as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    Ok(BinaryScores {
        recall,
        precision,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{build_grid, CellSpan, LogicalCell};

    fn r(tp: f64, gt: usize, pred: usize) -> GritsResult {
        GritsResult::new(Criterion::Con, tp, gt, pred)
    }

    #[test]
    fn mean_examples() {
        assert_eq!(aggregate_mean(&[r(4.0, 4, 4)]).unwrap().f1, 1.0);
        assert_eq!(
            aggregate_mean(&[r(4.0, 4, 4), r(0.0, 4, 0)]).unwrap().f1,
            0.5
        );
        assert_eq!(aggregate_mean(&[]), Err(AggregateError::EmptyCorpus));
        let m = aggregate_mean(&[r(1.0, 1, 1)]).unwrap();
        assert_eq!((m.precision, m.recall), (None, None));
    }

    #[test]
    fn pseudo_f1_worked_pair() {
        // Perfect 2x2 and an empty prediction against a 2x2 ground truth:
        // P = 4/4, R = 4/8, F1 = 2 * 1 * 0.5 / 1.5.
        let results = [r(4.0, 4, 4), r(0.0, 4, 0)];
        let s = aggregate_pseudo_f1(&results).unwrap();
        assert_eq!(s.precision, Some(1.0));
        assert_eq!(s.recall, Some(0.5));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((s.n_gt_cells, s.n_pred_cells), (8, 4));
    }

    #[test]
    fn pseudo_f1_zero_denominators() {
        let s = aggregate_pseudo_f1(&[r(0.0, 4, 0)]).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (Some(0.0), Some(0.0), 0.0));
        assert_eq!(aggregate_pseudo_f1(&[]), Err(AggregateError::EmptyCorpus));
    }

    #[test]
    fn equal_sizes_make_modes_agree() {
        let results = [r(3.0, 4, 4), r(1.5, 4, 4), r(4.0, 5, 3)];
        let mean = aggregate_mean(&results).unwrap().f1;
        let f1 = aggregate_pseudo_f1(&results).unwrap().f1;
        assert!((mean - f1).abs() < 1e-12);
    }

    #[test]
    fn accuracy_examples() {
        let g = build_grid(
            1,
            2,
            [
                LogicalCell::new(CellSpan::single(0, 0), "a"),
                LogicalCell::new(CellSpan::single(0, 1), "b"),
            ],
        )
        .unwrap();
        let g2 = build_grid(
            1,
            2,
            [
                LogicalCell::new(CellSpan::single(0, 0), "a"),
                LogicalCell::new(CellSpan::single(0, 1), "z"),
            ],
        )
        .unwrap();
        assert_eq!(
            exact_match_accuracy(&[(&g, Some(&g))], Criterion::Con).unwrap(),
            1.0
        );
        assert_eq!(
            exact_match_accuracy(&[(&g, None)], Criterion::Top).unwrap(),
            0.0
        );
        let pairs = [(&g, Some(&g)), (&g, Some(&g2))];
        assert_eq!(exact_match_accuracy(&pairs, Criterion::Con).unwrap(), 0.5);
        assert_eq!(exact_match_accuracy(&pairs, Criterion::Top).unwrap(), 1.0);
        assert!(exact_match_accuracy(&[], Criterion::Top).is_err());
    }

    #[test]
    fn binary_examples() {
        let all = [true, false, true];
        let s = binary_prf(&all, &all).unwrap();
        assert_eq!((s.recall, s.precision, s.f1), (1.0, 1.0, 1.0));

        let s = binary_prf(&[true, false], &[false, false]).unwrap();
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f1, 0.0);

        // TP 1, FP 1, FN 1.
        let s = binary_prf(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!((s.recall, s.precision, s.f1), (0.5, 0.5, 0.5));

        assert!(matches!(
            binary_prf(&[true], &[]),
            Err(AggregateError::LengthMismatch { .. })
        ));
        assert_eq!(binary_prf(&[], &[]), Err(AggregateError::EmptyCorpus));
    }
}
