//! Page objects, their parent-child graph, and graph/detection metrics.
//!
//! Pages carry eight object kinds, each optionally rotated by 90 degrees,
//! for sixteen classes in total. Relations are hierarchical: a table is the
//! parent of its rows, columns, headers, spanning cells, caption and footer.

mod detection;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use detection::{
    detection_ap, DetectionError, DetectionEvaluator, DetectionReport, COCO_IOU_THRESHOLDS,
};

use crate::assignment::max_weight_assignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectKind {
    Table,
    Column,
    Row,
    ColumnHeader,
    SpanningCell,
    ProjectedRowHeader,
    Caption,
    Footer,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 8] = [
        ObjectKind::Table,
        ObjectKind::Column,
        ObjectKind::Row,
        ObjectKind::ColumnHeader,
        ObjectKind::SpanningCell,
        ObjectKind::ProjectedRowHeader,
        ObjectKind::Caption,
        ObjectKind::Footer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Table => "table",
            ObjectKind::Column => "table column",
            ObjectKind::Row => "table row",
            ObjectKind::ColumnHeader => "table column header",
            ObjectKind::SpanningCell => "table spanning cell",
            ObjectKind::ProjectedRowHeader => "table projected row header",
            ObjectKind::Caption => "table caption",
            ObjectKind::Footer => "table footer",
        }
    }
}

/// One of the sixteen object classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    pub kind: ObjectKind,
    pub rotated: bool,
}

const ROTATED_SUFFIX: &str = " rotated";

impl ClassLabel {
    pub const fn new(kind: ObjectKind, rotated: bool) -> Self {
        Self { kind, rotated }
    }

    pub const TABLE: ClassLabel = ClassLabel::new(ObjectKind::Table, false);

    /// All sixteen classes, unrotated first.
    pub fn all() -> impl Iterator<Item = ClassLabel> {
        [false, true].into_iter().flat_map(|rotated| {
            ObjectKind::ALL
                .into_iter()
                .map(move |kind| ClassLabel { kind, rotated })
        })
    }

    /// Parses a canonical class name such as `table column header rotated`.
    pub fn from_name(name: &str) -> Option<ClassLabel> {
        let name = name.trim();
        let (base, rotated) = match name.strip_suffix(ROTATED_SUFFIX) {
            Some(base) => (base, true),
            None => (name, false),
        };
        ObjectKind::ALL
            .into_iter()
            .find(|k| k.name() == base)
            .map(|kind| ClassLabel { kind, rotated })
    }

    pub fn is_table(self) -> bool {
        self.kind == ObjectKind::Table
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if self.rotated {
            f.write_str(ROTATED_SUFFIX)?;
        }
        Ok(())
    }
}

/// Axis-aligned box in page pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GraphError> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min > x_max || y_min > y_max {
            return Err(GraphError::InvalidBox {
                coords: [x_min, y_min, x_max, y_max],
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageObject {
    pub class: ClassLabel,
    pub bbox: BBox,
    /// Confidence, predictions only.
    pub score: Option<f64>,
}

impl PageObject {
    pub fn new(class: ClassLabel, bbox: BBox) -> Self {
        Self {
            class,
            bbox,
            score: None,
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("invalid box {coords:?}")]
    InvalidBox { coords: [f64; 4] },
    #[error("edge {edge} references node {node} but the graph has {n_nodes} nodes")]
    EdgeOutOfRange {
        edge: usize,
        node: usize,
        n_nodes: usize,
    },
    #[error("edge {edge} is a self-loop")]
    SelfLoop { edge: usize },
    #[error("node {child} has more than one parent")]
    MultipleParents { child: usize },
    #[error("edge {edge} has a {class} parent; only tables may be parents")]
    NonTableParent { edge: usize, class: String },
}

/// Page objects with validated parent-child edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PageGraph {
    nodes: Vec<PageObject>,
    edges: Vec<(usize, usize)>,
}

impl PageGraph {
    pub fn new(nodes: Vec<PageObject>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        validate_relations(&nodes, &edges)?;
        Ok(Self { nodes, edges })
    }

    pub fn nodes(&self) -> &[PageObject] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Checks edge indices, self-loops, single parenthood and that every parent
/// is a table.
pub fn validate_relations(
    nodes: &[PageObject],
    edges: &[(usize, usize)],
) -> Result<(), GraphError> {
    let mut has_parent = alloc::vec![false; nodes.len()];
    for (edge, &(source, target)) in edges.iter().enumerate() {
        for node in [source, target] {
            if node >= nodes.len() {
                return Err(GraphError::EdgeOutOfRange {
                    edge,
                    node,
                    n_nodes: nodes.len(),
                });
            }
        }
        if source == target {
            return Err(GraphError::SelfLoop { edge });
        }
        if !nodes[source].class.is_table() {
            return Err(GraphError::NonTableParent {
                edge,
                class: alloc::string::ToString::to_string(&nodes[source].class),
            });
        }
        if core::mem::replace(&mut has_parent[target], true) {
            return Err(GraphError::MultipleParents { child: target });
        }
    }
    Ok(())
}

/// How predicted edges are paired with ground-truth edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMatching {
    /// Descending `min(source IoU, target IoU)`, ties by edge indices.
    #[default]
    Greedy,
    /// Maximum number of matched edges.
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub n_pred: usize,
    pub n_gt: usize,
    /// `(pred_edge, gt_edge)` pairs counted as true positives.
    pub matches: Vec<(usize, usize)>,
}

impl EdgeScores {
    /// Scores from counts, with the both-empty case scoring 1.
    pub fn from_counts(true_positives: usize, n_pred: usize, n_gt: usize) -> Self {
        let (precision, recall, f1) = if n_pred == 0 && n_gt == 0 {
            (1.0, 1.0, 1.0)
        } else {
            let p = if n_pred > 0 {
                true_positives as f64 / n_pred as f64
            } else {
                0.0
            };
            let r = if n_gt > 0 {
                true_positives as f64 / n_gt as f64
            } else {
                0.0
            };
            let f = if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            };
            (p, r, f)
        };
        Self {
            precision,
            recall,
            f1,
            true_positives,
            n_pred,
            n_gt,
            matches: Vec::new(),
        }
    }
}

fn node_iou(a: &PageObject, b: &PageObject) -> Option<f64> {
    (a.class == b.class).then(|| iou(&a.bbox, &b.bbox))
}

/// Edge precision, recall and F1.
///
/// A predicted edge is a true positive when an unused ground-truth edge has
/// a source and target that both match the predicted ones: same class and
/// IoU at least `iou_threshold`.
pub fn edge_f1(
    gt: &PageGraph,
    pred: &PageGraph,
    iou_threshold: f64,
    matching: EdgeMatching,
) -> EdgeScores {
    // (strength, pred edge, gt edge) for every admissible pairing.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (pe, &(ps, pt)) in pred.edges.iter().enumerate() {
        for (ge, &(gs, gt_)) in gt.edges.iter().enumerate() {
            let source = node_iou(&pred.nodes[ps], &gt.nodes[gs]);
            let target = node_iou(&pred.nodes[pt], &gt.nodes[gt_]);
            if let (Some(s), Some(t)) = (source, target) {
                if s >= iou_threshold && t >= iou_threshold {
                    candidates.push((s.min(t), pe, ge));
                }
            }
        }
    }

    let matches = match matching {
        EdgeMatching::Greedy => {
            candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut pred_used = alloc::vec![false; pred.edges.len()];
            let mut gt_used = alloc::vec![false; gt.edges.len()];
            let mut matches = Vec::new();
            for (_, pe, ge) in candidates {
                if !pred_used[pe] && !gt_used[ge] {
                    pred_used[pe] = true;
                    gt_used[ge] = true;
                    matches.push((pe, ge));
                }
            }
            matches.sort_unstable();
            matches
        }
        EdgeMatching::Optimal => {
            let mut gains = alloc::vec![alloc::vec![0.0; gt.edges.len()]; pred.edges.len()];
            for &(_, pe, ge) in &candidates {
                gains[pe][ge] = 1.0;
            }
            max_weight_assignment(&gains)
                .into_iter()
                .filter(|&(pe, ge)| gains[pe][ge] > 0.0)
                .collect()
        }
    };

    let mut scores = EdgeScores::from_counts(matches.len(), pred.edges.len(), gt.edges.len());
    scores.matches = matches;
    scores
}
