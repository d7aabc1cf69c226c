//! Annotated pages and documents.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{validate_relations, BBox, GraphError, PageGraph, PageObject};
use crate::table::TableGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub text: String,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PageAnnotation {
    pub image_id: String,
    /// `(width, height)` in pixels.
    pub page_size: (f64, f64),
    pub objects: Vec<PageObject>,
    pub words: Vec<Word>,
    /// `(parent_object_index, child_object_index)`.
    pub relations: Vec<(usize, usize)>,
}

impl PageAnnotation {
    pub fn validate(&self) -> Result<(), GraphError> {
        validate_relations(&self.objects, &self.relations)
    }

    pub fn graph(&self) -> Result<PageGraph, GraphError> {
        PageGraph::new(self.objects.clone(), self.relations.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablePart {
    pub page_index: usize,
    pub bbox: BBox,
}

/// A table with one bounding box per part, possibly on several pages.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPartTable {
    pub table_id: String,
    pub parts: Vec<TablePart>,
    pub grid: TableGrid,
    pub html: String,
}

impl MultiPartTable {
    pub fn pages_spanned(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.page_index)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn has_part_on(&self, page_index: usize) -> bool {
        self.parts.iter().any(|p| p.page_index == page_index)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("table {table_id} has no parts")]
    EmptyTable { table_id: String },
    #[error("table {table_id} references page {page_index} of a {n_pages}-page document")]
    PageOutOfRange {
        table_id: String,
        page_index: usize,
        n_pages: usize,
    },
    #[error("page {page}: {source}")]
    Relations { page: usize, source: GraphError },
}

/// A full document; `pages[i]` is page `i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub pages: Vec<PageAnnotation>,
    pub tables: Vec<MultiPartTable>,
}

impl DocumentRecord {
    pub fn validate(&self) -> Result<(), DocumentError> {
        for table in &self.tables {
            if table.parts.is_empty() {
                return Err(DocumentError::EmptyTable {
                    table_id: table.table_id.clone(),
                });
            }
            if let Some(part) = table
                .parts
                .iter()
                .find(|p| p.page_index >= self.pages.len())
            {
                return Err(DocumentError::PageOutOfRange {
                    table_id: table.table_id.clone(),
                    page_index: part.page_index,
                    n_pages: self.pages.len(),
                });
            }
        }
        for (page, annotation) in self.pages.iter().enumerate() {
            annotation
                .validate()
                .map_err(|source| DocumentError::Relations { page, source })?;
        }
        Ok(())
    }
}
