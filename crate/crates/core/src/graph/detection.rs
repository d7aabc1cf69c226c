//! Average precision for page-object detection.
//!
//! Predictions are matched per page and per class, highest score first, to
//! the unused ground-truth box of highest IoU at or above the threshold.
//! Ranking for the precision-recall curve is global across pages. AP is the
//! area under the all-points monotone precision envelope. Classes without
//! ground truth are left out of the class mean.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{iou, ClassLabel, PageObject};

/// IoU thresholds 0.50:0.05:0.95.
pub const COCO_IOU_THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DetectionError {
    #[error("prediction {index} has no finite score")]
    MissingScores { index: usize },
}

#[derive(Debug, Clone)]
struct Detection {
    score: f64,
    page: usize,
    index: usize,
    /// True positive at each threshold.
    hits: Vec<bool>,
}

#[derive(Debug, Clone, Default)]
struct ClassRecords {
    n_gt: usize,
    detections: Vec<Detection>,
}

/// Accumulates detections page by page.
#[derive(Debug, Clone)]
pub struct DetectionEvaluator {
    thresholds: Vec<f64>,
    classes: BTreeMap<ClassLabel, ClassRecords>,
    pages: usize,
}

impl DetectionEvaluator {
    pub fn new(thresholds: &[f64]) -> Self {
        Self {
            thresholds: thresholds.to_vec(),
            classes: BTreeMap::new(),
            pages: 0,
        }
    }

    /// Evaluator over [`COCO_IOU_THRESHOLDS`].
    pub fn coco() -> Self {
        Self::new(&COCO_IOU_THRESHOLDS)
    }

    pub fn add_page(
        &mut self,
        gt: &[PageObject],
        pred: &[PageObject],
    ) -> Result<(), DetectionError> {
        let mut scores = Vec::with_capacity(pred.len());
        for (index, p) in pred.iter().enumerate() {
            match p.score {
                Some(s) if s.is_finite() => scores.push(s),
                _ => return Err(DetectionError::MissingScores { index }),
            }
        }
        let page = self.pages;
        self.pages += 1;

        let mut labels: Vec<ClassLabel> = gt.iter().chain(pred).map(|o| o.class).collect();
        labels.sort_unstable();
        labels.dedup();
        for class in labels {
            let gt_boxes: Vec<_> = gt
                .iter()
                .filter(|o| o.class == class)
                .map(|o| o.bbox)
                .collect();
            let mut order: Vec<usize> = (0..pred.len())
                .filter(|&i| pred[i].class == class)
                .collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

            let mut hits = vec![Vec::with_capacity(self.thresholds.len()); order.len()];
            for &threshold in &self.thresholds {
                let mut used = vec![false; gt_boxes.len()];
                for (rank, &i) in order.iter().enumerate() {
                    let mut best: Option<(f64, usize)> = None;
                    for (g, gbox) in gt_boxes.iter().enumerate() {
                        if used[g] {
                            continue;
                        }
                        let overlap = iou(&pred[i].bbox, gbox);
                        if overlap >= threshold && best.is_none_or(|(b, _)| overlap > b) {
                            best = Some((overlap, g));
                        }
                    }
                    if let Some((_, g)) = best {
                        used[g] = true;
                    }
                    hits[rank].push(best.is_some());
                }
            }

            let records = self.classes.entry(class).or_default();
            records.n_gt += gt_boxes.len();
            records
                .detections
                .extend(order.into_iter().zip(hits).map(|(index, hits)| Detection {
                    score: scores[index],
                    page,
                    index,
                    hits,
                }));
        }
        Ok(())
    }

    pub fn report(&self) -> DetectionReport {
        let mut per_class: Vec<(ClassLabel, Vec<f64>)> = Vec::new();
        for (&class, records) in &self.classes {
            if records.n_gt == 0 {
                continue;
            }
            let mut ranked: Vec<&Detection> = records.detections.iter().collect();
            ranked.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then(a.page.cmp(&b.page))
                    .then(a.index.cmp(&b.index))
            });
            let aps: Vec<f64> = (0..self.thresholds.len())
                .map(|t| {
                    let hits: Vec<bool> = ranked.iter().map(|d| d.hits[t]).collect();
                    average_precision(&hits, records.n_gt)
                })
                .collect();
            per_class.push((class, aps));
        }
        let mean_per_threshold = (0..self.thresholds.len())
            .map(|t| {
                if per_class.is_empty() {
                    None
                } else {
                    let sum: f64 = per_class.iter().map(|(_, aps)| aps[t]).sum();
                    Some(sum / per_class.len() as f64)
                }
            })
            .collect();
        DetectionReport {
            thresholds: self.thresholds.clone(),
            per_class,
            mean_per_threshold,
        }
    }
}

/// All-points interpolated AP of a ranked hit list.
fn average_precision(hits: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut recall = Vec::with_capacity(hits.len() + 2);
    let mut precision = Vec::with_capacity(hits.len() + 2);
    recall.push(0.0);
    precision.push(0.0);
    let (mut tp, mut fp) = (0usize, 0usize);
    for &hit in hits {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    recall.push(1.0);
    precision.push(0.0);
    for i in (0..precision.len() - 1).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    for i in 1..recall.len() {
        ap += (recall[i] - recall[i - 1]) * precision[i];
    }
    ap
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub thresholds: Vec<f64>,
    /// AP per threshold for every class with ground truth.
    pub per_class: Vec<(ClassLabel, Vec<f64>)>,
    /// Class-mean AP per threshold; `None` without any ground truth.
    pub mean_per_threshold: Vec<Option<f64>>,
}

impl DetectionReport {
    /// Class-mean AP at one of the configured thresholds.
    pub fn ap_at(&self, threshold: f64) -> Option<f64> {
        let t = self
            .thresholds
            .iter()
            .position(|&x| (x - threshold).abs() < 1e-9)?;
        self.mean_per_threshold[t]
    }

    pub fn ap50(&self) -> Option<f64> {
        self.ap_at(0.5)
    }

    pub fn ap75(&self) -> Option<f64> {
        self.ap_at(0.75)
    }

    /// Class-mean AP averaged over every configured threshold.
    pub fn ap(&self) -> Option<f64> {
        let values: Option<Vec<f64>> = self.mean_per_threshold.iter().copied().collect();
        let values = values?;
        if values.is_empty() {
            return None;
        }
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// AP of one page's predictions at each threshold.
pub fn detection_ap(
    gt: &[PageObject],
    pred: &[PageObject],
    thresholds: &[f64],
) -> Result<DetectionReport, DetectionError> {
    let mut evaluator = DetectionEvaluator::new(thresholds);
    evaluator.add_page(gt, pred)?;
    Ok(evaluator.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BBox, ObjectKind};

    fn table(x0: f64, x1: f64) -> PageObject {
        PageObject::new(
            ClassLabel::new(ObjectKind::Table, false),
            BBox::new(x0, 0.0, x1, 10.0).unwrap(),
        )
    }

    #[test]
    fn perfect_detector() {
        let gt = [table(0.0, 10.0)];
        let pred = [table(0.0, 10.0).with_score(0.9)];
        let r = detection_ap(&gt, &pred, &COCO_IOU_THRESHOLDS).unwrap();
        assert_eq!(r.ap50(), Some(1.0));
        assert_eq!(r.ap75(), Some(1.0));
        assert_eq!(r.ap(), Some(1.0));
    }

    #[test]
    fn no_predictions() {
        let r = detection_ap(&[table(0.0, 10.0)], &[], &COCO_IOU_THRESHOLDS).unwrap();
        assert_eq!(r.ap(), Some(0.0));
    }

    #[test]
    fn iou_point_six() {
        // [0, 10] vs [2.5, 12.5]: intersection 7.5, union 12.5.
        let gt = [table(0.0, 10.0)];
        let pred = [table(2.5, 12.5).with_score(0.5)];
        assert!((iou(&gt[0].bbox, &pred[0].bbox) - 0.6).abs() < 1e-12);
        let r = detection_ap(&gt, &pred, &COCO_IOU_THRESHOLDS).unwrap();
        assert_eq!(r.ap50(), Some(1.0));
        assert_eq!(r.ap75(), Some(0.0));
    }

    #[test]
    fn missing_score_rejected() {
        let err = detection_ap(&[], &[table(0.0, 1.0)], &[0.5]).unwrap_err();
        assert_eq!(err, DetectionError::MissingScores { index: 0 });
    }

    #[test]
    fn false_positive_ranked_first_halves_precision() {
        let gt = [table(0.0, 10.0)];
        let pred = [
            table(50.0, 60.0).with_score(0.9),
            table(0.0, 10.0).with_score(0.8),
        ];
        let r = detection_ap(&gt, &pred, &[0.5]).unwrap();
        assert_eq!(r.ap50(), Some(0.5));
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(
            average_precision(&[true, false, true], 2),
            1.0 * 0.5 + (2.0 / 3.0) * 0.5
        );
        assert_eq!(average_precision(&[], 3), 0.0);
    }

    #[test]
    fn pages_are_matched_separately() {
        let mut ev = DetectionEvaluator::new(&[0.5]);
        ev.add_page(&[table(0.0, 10.0)], &[]).unwrap();
        ev.add_page(&[], &[table(0.0, 10.0).with_score(1.0)])
            .unwrap();
        assert_eq!(ev.report().ap50(), Some(0.0));
    }
}
