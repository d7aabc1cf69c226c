use serde::{Deserialize, Serialize};

use tablegrid_core::graph::{ClassLabel, PageGraph, PageObject};

use super::{bbox_from, ClassPolicy, IoError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRecord {
    class: String,
    bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    image_id: String,
    objects: Vec<ObjectRecord>,
    #[serde(default)]
    relations: Vec<(usize, usize)>,
}

/// A page graph file: typed boxes with optional scores plus relations.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub image_id: String,
    pub graph: PageGraph,
    /// Class names dropped under [`ClassPolicy::Lenient`].
    pub unknown_classes: Vec<String>,
}

/// Reads `{"image_id", "objects": [{"class", "bbox", "score"}], "relations"}`.
///
/// Under the lenient policy, objects of unknown class are dropped and
/// relations are renumbered; relations touching a dropped object go too.
pub fn load_graph_json(bytes: &[u8], policy: ClassPolicy) -> Result<GraphFile, IoError> {
    let record: GraphRecord = serde_json::from_slice(bytes).map_err(IoError::schema)?;
    let mut unknown_classes = Vec::new();
    let mut new_index = Vec::with_capacity(record.objects.len());
    let mut nodes = Vec::new();
    for object in record.objects {
        let Some(class) = ClassLabel::from_name(&object.class) else {
            if policy == ClassPolicy::Strict {
                return Err(IoError::UnknownClassName(object.class));
            }
            unknown_classes.push(object.class);
            new_index.push(None);
            continue;
        };
        new_index.push(Some(nodes.len()));
        let mut node = PageObject::new(class, bbox_from(object.bbox)?);
        node.score = object.score;
        nodes.push(node);
    }
    let mut edges = Vec::with_capacity(record.relations.len());
    for (p, c) in record.relations {
        let lookup = |i: usize| {
            new_index
                .get(i)
                .copied()
                .ok_or_else(|| IoError::schema(format!("relation references missing object {i}")))
        };
        if let (Some(p), Some(c)) = (lookup(p)?, lookup(c)?) {
            edges.push((p, c));
        }
    }
    Ok(GraphFile {
        image_id: record.image_id,
        graph: PageGraph::new(nodes, edges)?,
        unknown_classes,
    })
}

pub fn save_graph_json(image_id: &str, graph: &PageGraph) -> Vec<u8> {
    let record = GraphRecord {
        image_id: image_id.to_string(),
        objects: graph
            .nodes()
            .iter()
            .map(|o| ObjectRecord {
                class: o.class.to_string(),
                bbox: o.bbox.to_array(),
                score: o.score,
            })
            .collect(),
        relations: graph.edges().to_vec(),
    };
    let mut out = serde_json::to_vec(&record).expect("graph records always serialize");
    out.push(b'\n');
    out
}
