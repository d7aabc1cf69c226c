//! Corpus evaluation and report records.
//!
//! Samples are scored independently on a worker pool and merged in sample
//! order. Aggregates are computed once, after the merge, so a report is a
//! function of its inputs alone.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use tablegrid_core::graph::{
    edge_f1, DetectionEvaluator, EdgeMatching, EdgeScores, PageGraph, COCO_IOU_THRESHOLDS,
};
use tablegrid_core::grits::align_2d_exact;
use tablegrid_core::parse::ParseWarning;
use tablegrid_core::table::{grid_exact_match, TableGrid};
use tablegrid_core::text::CompensatedSum;
use tablegrid_core::{
    aggregate_mean, aggregate_pseudo_f1, match_table_sets, Criterion, GritsResult, TableSetMatch,
};

/// Runs `f` over `items` on `jobs` threads, keeping input order.
pub fn par_map<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
        .install(|| items.par_iter().map(&f).collect())
}

/// A diagnostic for the warning stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleWarning {
    pub sample: String,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl SampleWarning {
    pub fn new(sample: &str, code: &str, message: impl Into<String>) -> Self {
        Self {
            sample: sample.to_string(),
            code: code.to_string(),
            message: message.into(),
            table: None,
            row: None,
            col: None,
            line: None,
        }
    }

    pub fn from_parse(sample: &str, w: &ParseWarning) -> Self {
        Self {
            table: w.location.table,
            row: w.location.row,
            col: w.location.col,
            line: w.location.line,
            ..Self::new(sample, w.code.name(), w.message.clone())
        }
    }
}

/// Loaded inputs of one table-structure sample.
#[derive(Debug, Clone)]
pub struct TableSample {
    pub id: String,
    /// Ground truth; an error makes the sample unscorable.
    pub gt: Result<Vec<TableGrid>, String>,
    /// Predicted grids; an error is scored as an empty prediction.
    pub pred: Result<Vec<TableGrid>, String>,
    pub repaired: bool,
    pub warnings: Vec<SampleWarning>,
}

#[derive(Debug, Clone, Copy)]
pub struct TableEvalOptions<'a> {
    pub criteria: &'a [Criterion],
    /// Compare each matched pair with the exact optimum when both grids fit.
    pub oracle_limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRecord {
    pub pred_index: Option<usize>,
    pub tp: f64,
    pub score: f64,
    pub size_gt: usize,
    pub size_pred: usize,
    pub exact: bool,
    /// Exact-oracle tp minus heuristic tp; absent beyond the oracle limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRecord {
    pub gt_index: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<CriterionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub con: Option<CriterionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub sample: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub n_pred_tables: usize,
    pub repaired: bool,
    pub tables: Vec<TableRecord>,
    /// Predictions left without a ground-truth table, per criterion.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub unmatched_pred: BTreeMap<&'static str, Vec<usize>>,
}

/// Per-sample output before aggregation.
#[derive(Debug, Clone)]
pub struct ScoredSample {
    pub record: SampleRecord,
    pub matches: Vec<TableSetMatch>,
    pub warnings: Vec<SampleWarning>,
    pub failed: bool,
}

fn criterion_record(
    m: &TableSetMatch,
    g: usize,
    gt: &TableGrid,
    pred: &[TableGrid],
    oracle_limit: Option<usize>,
) -> CriterionRecord {
    let r = m.per_gt_results[g];
    let pred_index = m.pred_for(g);
    let matched = pred_index.map(|p| &pred[p]);
    let oracle_gap = match (oracle_limit, matched) {
        (Some(limit), Some(p)) => align_2d_exact(gt, p, m.criterion, limit)
            .ok()
            .map(|exact| exact.tp_score - r.tp),
        _ => None,
    };
    CriterionRecord {
        pred_index,
        tp: r.tp,
        score: r.score,
        size_gt: r.size_gt,
        size_pred: r.size_pred,
        exact: matched.is_some_and(|p| grid_exact_match(gt, p, m.criterion)),
        oracle_gap,
    }
}

pub fn score_table_sample(sample: &TableSample, options: TableEvalOptions) -> ScoredSample {
    let mut warnings = sample.warnings.clone();
    let gt = match &sample.gt {
        Ok(gt) => gt,
        Err(e) => {
            warnings.push(SampleWarning::new(
                &sample.id,
                "GroundTruthError",
                e.clone(),
            ));
            return ScoredSample {
                record: SampleRecord {
                    sample: sample.id.clone(),
                    status: "failed",
                    error: Some(e.clone()),
                    n_pred_tables: 0,
                    repaired: false,
                    tables: Vec::new(),
                    unmatched_pred: BTreeMap::new(),
                },
                matches: Vec::new(),
                warnings,
                failed: true,
            };
        }
    };
    let (pred, error): (&[TableGrid], Option<String>) = match &sample.pred {
        Ok(p) => (p, None),
        Err(e) => {
            warnings.push(SampleWarning::new(&sample.id, "PredictionError", e.clone()));
            (&[], Some(e.clone()))
        }
    };

    let matches: Vec<TableSetMatch> = options
        .criteria
        .iter()
        .map(|&c| match_table_sets(gt, pred, c))
        .collect();
    let find = |c: Criterion| matches.iter().find(|m| m.criterion == c);
    let tables = gt
        .iter()
        .enumerate()
        .map(|(g, grid)| {
            let record =
                |c| find(c).map(|m| criterion_record(m, g, grid, pred, options.oracle_limit));
            TableRecord {
                gt_index: g,
                n_rows: grid.n_rows(),
                n_cols: grid.n_cols(),
                top: record(Criterion::Top),
                con: record(Criterion::Con),
            }
        })
        .collect();
    let unmatched_pred = matches
        .iter()
        .filter(|m| !m.unmatched_pred.is_empty())
        .map(|m| (m.criterion.name(), m.unmatched_pred.clone()))
        .collect();
    ScoredSample {
        record: SampleRecord {
            sample: sample.id.clone(),
            status: if error.is_some() { "failed" } else { "ok" },
            error: error.clone(),
            n_pred_tables: pred.len(),
            repaired: sample.repaired,
            tables,
            unmatched_pred,
        },
        matches,
        warnings,
        failed: error.is_some(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoF1 {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GritsBlock {
    /// Mean over ground-truth tables; absent without any.
    pub mean: Option<f64>,
    pub pseudo_f1: Option<PseudoF1>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusBlock {
    pub n_samples: usize,
    pub n_failed: usize,
    pub n_gt_tables: usize,
    pub n_pred_tables: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grits_top: Option<GritsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grits_con: Option<GritsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc_top: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc_con: Option<f64>,
    /// Largest oracle gap per criterion, when checked.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub max_oracle_gap: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub command: String,
    pub criteria: Vec<&'static str>,
    pub corpus: CorpusBlock,
    pub samples: Vec<SampleRecord>,
}

fn grits_block(results: &[GritsResult], pf1_results: &[GritsResult]) -> GritsBlock {
    GritsBlock {
        mean: aggregate_mean(results).ok().map(|a| a.f1),
        pseudo_f1: aggregate_pseudo_f1(pf1_results).ok().map(|a| PseudoF1 {
            p: a.precision.unwrap_or(0.0),
            r: a.recall.unwrap_or(0.0),
            f1: a.f1,
        }),
    }
}

/// Aggregates scored samples, in order, into a report.
pub fn table_report(
    command: &str,
    criteria: &[Criterion],
    scored: Vec<ScoredSample>,
) -> TableReport {
    let n_gt_tables = scored.iter().map(|s| s.record.tables.len()).sum();
    let mut corpus = CorpusBlock {
        n_samples: scored.len(),
        n_failed: scored.iter().filter(|s| s.failed).count(),
        n_gt_tables,
        n_pred_tables: scored.iter().map(|s| s.record.n_pred_tables).sum(),
        grits_top: None,
        grits_con: None,
        acc_top: None,
        acc_con: None,
        max_oracle_gap: BTreeMap::new(),
    };
    for &c in criteria {
        let matches = || {
            scored
                .iter()
                .flat_map(|s| s.matches.iter().filter(move |m| m.criterion == c))
        };
        let per_gt: Vec<GritsResult> = matches()
            .flat_map(|m| m.per_gt_results.iter().copied())
            .collect();
        let pf1: Vec<GritsResult> = matches()
            .flat_map(|m| m.pseudo_f1_results().copied())
            .collect();
        let records = || {
            scored.iter().flat_map(move |s| {
                s.record.tables.iter().filter_map(move |t| match c {
                    Criterion::Top => t.top.as_ref(),
                    Criterion::Con => t.con.as_ref(),
                })
            })
        };
        let hits = records().filter(|r| r.exact).count();
        let acc = (n_gt_tables > 0).then(|| hits as f64 / n_gt_tables as f64);
        let block = Some(grits_block(&per_gt, &pf1));
        match c {
            Criterion::Top => (corpus.grits_top, corpus.acc_top) = (block, acc),
            Criterion::Con => (corpus.grits_con, corpus.acc_con) = (block, acc),
        }
        if let Some(gap) = records().filter_map(|r| r.oracle_gap).reduce(f64::max) {
            corpus.max_oracle_gap.insert(c.name(), gap);
        }
    }
    TableReport {
        command: command.to_string(),
        criteria: criteria.iter().map(|c| c.name()).collect(),
        corpus,
        samples: scored.into_iter().map(|s| s.record).collect(),
    }
}

/// Loaded inputs of one page-graph sample.
#[derive(Debug, Clone)]
pub struct GraphSample {
    pub id: String,
    pub gt: Result<PageGraph, String>,
    pub pred: Result<PageGraph, String>,
    pub warnings: Vec<SampleWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeBlock {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub n_pred: usize,
    pub n_gt: usize,
}

impl From<&EdgeScores> for EdgeBlock {
    fn from(s: &EdgeScores) -> Self {
        Self {
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
            true_positives: s.true_positives,
            n_pred: s.n_pred,
            n_gt: s.n_gt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSampleRecord {
    pub sample: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<EdgeBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionBlock {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    /// Class name to AP over all thresholds.
    pub per_class: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphCorpusBlock {
    pub n_samples: usize,
    pub n_failed: usize,
    pub iou_threshold: f64,
    /// Counts pooled over pages.
    pub edges: EdgeBlock,
    /// Mean of per-page edge F1.
    pub mean_edge_f1: Option<f64>,
    pub detection: DetectionBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    pub command: String,
    pub corpus: GraphCorpusBlock,
    pub samples: Vec<GraphSampleRecord>,
}

pub struct ScoredGraph {
    pub record: GraphSampleRecord,
    pub warnings: Vec<SampleWarning>,
    edges: Option<EdgeScores>,
    detection: Option<(PageGraph, PageGraph)>,
}

pub fn score_graph_sample(sample: &GraphSample, iou_threshold: f64) -> ScoredGraph {
    let mut warnings = sample.warnings.clone();
    let failed = |error: String, warnings: Vec<SampleWarning>| ScoredGraph {
        record: GraphSampleRecord {
            sample: sample.id.clone(),
            status: "failed",
            error: Some(error),
            edges: None,
        },
        warnings,
        edges: None,
        detection: None,
    };
    let gt = match &sample.gt {
        Ok(g) => g,
        Err(e) => {
            warnings.push(SampleWarning::new(
                &sample.id,
                "GroundTruthError",
                e.clone(),
            ));
            return failed(e.clone(), warnings);
        }
    };
    let empty = PageGraph::new(Vec::new(), Vec::new()).expect("empty graph is valid");
    let (pred, error) = match &sample.pred {
        Ok(p) => (p, None),
        Err(e) => {
            warnings.push(SampleWarning::new(&sample.id, "PredictionError", e.clone()));
            (&empty, Some(e.clone()))
        }
    };
    let scores = edge_f1(gt, pred, iou_threshold, EdgeMatching::Greedy);
    ScoredGraph {
        record: GraphSampleRecord {
            sample: sample.id.clone(),
            status: if error.is_some() { "failed" } else { "ok" },
            error,
            edges: Some(EdgeBlock::from(&scores)),
        },
        warnings,
        edges: Some(scores),
        detection: Some((gt.clone(), pred.clone())),
    }
}

/// Pools edge counts and runs detection AP over pages in sample order.
///
/// Predicted objects without a score rank last, in file order.
pub fn graph_report(command: &str, iou_threshold: f64, scored: Vec<ScoredGraph>) -> GraphReport {
    let (mut tp, mut n_pred, mut n_gt) = (0, 0, 0);
    let mut f1_sum = CompensatedSum::new();
    let mut n_scored = 0;
    let mut detector = DetectionEvaluator::coco();
    for s in &scored {
        if let Some(e) = &s.edges {
            tp += e.true_positives;
            n_pred += e.n_pred;
            n_gt += e.n_gt;
            f1_sum.add(e.f1);
            n_scored += 1;
        }
        if let Some((gt, pred)) = &s.detection {
            let pred: Vec<_> = pred
                .nodes()
                .iter()
                .map(|o| o.clone().with_score(o.score.unwrap_or(f64::MIN)))
                .collect();
            detector
                .add_page(gt.nodes(), &pred)
                .expect("every prediction carries a finite score");
        }
    }
    let det = detector.report();
    let per_class = det
        .per_class
        .iter()
        .map(|(class, aps)| {
            (
                class.to_string(),
                aps.iter().sum::<f64>() / aps.len() as f64,
            )
        })
        .collect();
    debug_assert_eq!(det.thresholds, COCO_IOU_THRESHOLDS);
    GraphReport {
        command: command.to_string(),
        corpus: GraphCorpusBlock {
            n_samples: scored.len(),
            n_failed: scored
                .iter()
                .filter(|s| s.record.status == "failed")
                .count(),
            iou_threshold,
            edges: EdgeBlock::from(&EdgeScores::from_counts(tp, n_pred, n_gt)),
            mean_edge_f1: (n_scored > 0).then(|| f1_sum.value() / n_scored as f64),
            detection: DetectionBlock {
                ap: det.ap(),
                ap50: det.ap50(),
                ap75: det.ap75(),
                per_class,
            },
        },
        samples: scored.into_iter().map(|s| s.record).collect(),
    }
}
