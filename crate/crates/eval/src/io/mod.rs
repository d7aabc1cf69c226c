//! On-disk formats: grid JSON, VOC page annotations, JSON sidecars, page
//! graphs, pair lists and prediction files, plus corpus statistics.

mod graph_json;
mod grid_json;
mod pairs;
mod predictions;
mod sidecar;
mod stats;
mod voc;

use std::path::{Path, PathBuf};

use tablegrid_core::document::DocumentError;
use tablegrid_core::graph::GraphError;
use tablegrid_core::parse::ParseError;
use tablegrid_core::table::GridError;

pub use graph_json::{load_graph_json, save_graph_json, GraphFile};
pub use grid_json::{load_grid_json, load_grid_list, save_grid_json, save_grid_list};
pub use pairs::{read_pairs_jsonl, write_pairs_jsonl};
pub use predictions::{parse_prediction, CommandConverter, Identity, PreConvert, PredictionFormat};
pub use sidecar::{
    attach_sidecar, load_documents_json, load_relations_json, read_sidecar_json,
    save_documents_json, save_sidecar_json, Sidecar,
};
pub use stats::{collection_dirs, corpus_stats, FileWarning, StatsReport, SPLITS};
pub use voc::{read_voc_annotation, ClassPolicy, VocPage};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("malformed XML: {0}")]
    XmlMalformed(String),
    #[error("unknown class name {0:?}")]
    UnknownClassName(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl IoError {
    fn schema(message: impl std::fmt::Display) -> Self {
        IoError::SchemaViolation(message.to_string())
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Entries of a directory sorted by file name.
pub fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let io = |source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        out.push(entry.map_err(io)?.path());
    }
    out.sort();
    Ok(out)
}

/// Parses `[x_min, y_min, x_max, y_max]`.
fn bbox_from(coords: [f64; 4]) -> Result<tablegrid_core::graph::BBox, IoError> {
    Ok(tablegrid_core::graph::BBox::new(
        coords[0], coords[1], coords[2], coords[3],
    )?)
}
