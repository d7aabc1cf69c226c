//! JSON sidecars: per-page words and relations, collection-level relations
//! and the multi-page document index.
//!
//! Canonical form: fixed key order, boxes as `[x_min, y_min, x_max, y_max]`,
//! empty collections and empty grids omitted. Reading and re-saving a
//! canonical file reproduces it byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use tablegrid_core::document::{DocumentRecord, MultiPartTable, PageAnnotation, TablePart, Word};
use tablegrid_core::graph::validate_relations;
use tablegrid_core::table::TableGrid;

use super::grid_json::GridRecord;
use super::{bbox_from, IoError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordRecord {
    text: String,
    bbox: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartRecord {
    page: usize,
    bbox: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRecord {
    table_id: String,
    parts: Vec<PartRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridRecord>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    html: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarRecord {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    words: Vec<WordRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relations: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tables: Vec<TableRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    grids: Vec<GridRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentEntry {
    doc_id: String,
    /// Image ids in page order.
    pages: Vec<String>,
    #[serde(default)]
    tables: Vec<TableRecord>,
}

/// Contents of one sidecar file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sidecar {
    pub words: Vec<Word>,
    pub relations: Vec<(usize, usize)>,
    pub tables: Vec<MultiPartTable>,
    pub grids: Vec<TableGrid>,
}

fn table_from(record: TableRecord) -> Result<MultiPartTable, IoError> {
    if record.parts.is_empty() {
        return Err(IoError::schema(format!(
            "table {} has no parts",
            record.table_id
        )));
    }
    let parts = record
        .parts
        .into_iter()
        .map(|p| {
            Ok(TablePart {
                page_index: p.page,
                bbox: bbox_from(p.bbox)?,
            })
        })
        .collect::<Result<_, IoError>>()?;
    Ok(MultiPartTable {
        table_id: record.table_id,
        parts,
        grid: record
            .grid
            .map_or(Ok(TableGrid::empty()), GridRecord::into_grid)?,
        html: record.html,
    })
}

fn table_record(table: &MultiPartTable) -> TableRecord {
    TableRecord {
        table_id: table.table_id.clone(),
        parts: table
            .parts
            .iter()
            .map(|p| PartRecord {
                page: p.page_index,
                bbox: p.bbox.to_array(),
            })
            .collect(),
        grid: (!table.grid.is_empty()).then(|| GridRecord::from_grid(&table.grid)),
        html: table.html.clone(),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec(value).expect("sidecar records always serialize");
    out.push(b'\n');
    out
}

pub fn read_sidecar_json(bytes: &[u8]) -> Result<Sidecar, IoError> {
    let record: SidecarRecord = serde_json::from_slice(bytes).map_err(IoError::schema)?;
    Ok(Sidecar {
        words: record
            .words
            .into_iter()
            .map(|w| {
                Ok(Word {
                    text: w.text,
                    bbox: bbox_from(w.bbox)?,
                })
            })
            .collect::<Result<_, IoError>>()?,
        relations: record.relations,
        tables: record
            .tables
            .into_iter()
            .map(table_from)
            .collect::<Result<_, _>>()?,
        grids: record
            .grids
            .into_iter()
            .map(GridRecord::into_grid)
            .collect::<Result<_, _>>()?,
    })
}

pub fn save_sidecar_json(sidecar: &Sidecar) -> Vec<u8> {
    to_json(&SidecarRecord {
        words: sidecar
            .words
            .iter()
            .map(|w| WordRecord {
                text: w.text.clone(),
                bbox: w.bbox.to_array(),
            })
            .collect(),
        relations: sidecar.relations.clone(),
        tables: sidecar.tables.iter().map(table_record).collect(),
        grids: sidecar.grids.iter().map(GridRecord::from_grid).collect(),
    })
}

/// Adds sidecar words and relations to a page read from VOC.
///
/// Relations must reference existing objects and satisfy the hierarchy.
/// The page is left unchanged on error.
pub fn attach_sidecar(page: &mut PageAnnotation, sidecar: Sidecar) -> Result<(), IoError> {
    let n = page.objects.len();
    if let Some(&(p, c)) = sidecar.relations.iter().find(|&&(p, c)| p >= n || c >= n) {
        return Err(IoError::schema(format!(
            "relation ({p}, {c}) references a missing object; the page has {n}"
        )));
    }
    let mut relations = page.relations.clone();
    relations.extend(sidecar.relations);
    validate_relations(&page.objects, &relations)?;
    page.relations = relations;
    page.words.extend(sidecar.words);
    Ok(())
}

/// Collection-level relations keyed by image id.
pub fn load_relations_json(bytes: &[u8]) -> Result<BTreeMap<String, Vec<(usize, usize)>>, IoError> {
    serde_json::from_slice(bytes).map_err(IoError::schema)
}

/// The document index. Pages carry only their image ids.
pub fn load_documents_json(bytes: &[u8]) -> Result<Vec<DocumentRecord>, IoError> {
    let entries: Vec<DocumentEntry> = serde_json::from_slice(bytes).map_err(IoError::schema)?;
    entries
        .into_iter()
        .map(|e| {
            let doc = DocumentRecord {
                doc_id: e.doc_id,
                pages: e
                    .pages
                    .into_iter()
                    .map(|image_id| PageAnnotation {
                        image_id,
                        ..PageAnnotation::default()
                    })
                    .collect(),
                tables: e
                    .tables
                    .into_iter()
                    .map(table_from)
                    .collect::<Result<_, _>>()?,
            };
            doc.validate()?;
            Ok(doc)
        })
        .collect()
}

pub fn save_documents_json(docs: &[DocumentRecord]) -> Vec<u8> {
    let entries: Vec<DocumentEntry> = docs
        .iter()
        .map(|d| DocumentEntry {
            doc_id: d.doc_id.clone(),
            pages: d.pages.iter().map(|p| p.image_id.clone()).collect(),
            tables: d.tables.iter().map(table_record).collect(),
        })
        .collect();
    to_json(&entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tablegrid_core::graph::{BBox, ClassLabel, ObjectKind, PageObject};

    #[test]
    fn words_only() {
        let s = read_sidecar_json(br#"{"words":[{"text":"Age","bbox":[1,2,3,4]}]}"#).unwrap();
        assert_eq!(s.words.len(), 1);
        assert_eq!(s.words[0].text, "Age");
        assert!(s.relations.is_empty() && s.tables.is_empty());
    }

    #[test]
    fn relation_to_missing_object() {
        let mut page = PageAnnotation {
            objects: vec![PageObject::new(
                ClassLabel::TABLE,
                BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(),
            )],
            ..PageAnnotation::default()
        };
        let s = read_sidecar_json(br#"{"relations":[[0,3]]}"#).unwrap();
        assert!(matches!(
            attach_sidecar(&mut page, s),
            Err(IoError::SchemaViolation(_))
        ));

        page.objects.push(PageObject::new(
            ClassLabel::new(ObjectKind::Row, false),
            BBox::new(0.0, 0.0, 1.0, 0.5).unwrap(),
        ));
        let reversed = read_sidecar_json(br#"{"relations":[[1,0]]}"#).unwrap();
        assert!(matches!(
            attach_sidecar(&mut page, reversed),
            Err(IoError::Graph(_))
        ));
        let ok = read_sidecar_json(br#"{"relations":[[0,1]]}"#).unwrap();
        attach_sidecar(&mut page, ok).unwrap();
        assert_eq!(page.relations, vec![(0, 1)]);
    }

    #[test]
    fn three_page_boundary_record() {
        let json = br#"{"tables":[{"table_id":"t0","parts":[
            {"page":2,"bbox":[0,500,600,800]},
            {"page":3,"bbox":[0,0,600,800]},
            {"page":4,"bbox":[0,0,600,200]}],"html":"<table></table>"}]}"#;
        let s = read_sidecar_json(json).unwrap();
        assert_eq!(s.tables[0].parts.len(), 3);
        assert_eq!(s.tables[0].pages_spanned(), 3);
    }

    #[test]
    fn canonical_form_is_byte_stable() {
        let json =
            br#"{ "relations": [[0, 1]], "words": [{"bbox": [1, 2.50, 3, 4e0], "text": "x"}] }"#;
        let once = save_sidecar_json(&read_sidecar_json(json).unwrap());
        let twice = save_sidecar_json(&read_sidecar_json(&once).unwrap());
        assert_eq!(once, twice);
        assert_eq!(
            String::from_utf8(once).unwrap(),
            "{\"words\":[{\"text\":\"x\",\"bbox\":[1.0,2.5,3.0,4.0]}],\"relations\":[[0,1]]}\n"
        );
    }

    #[test]
    fn documents_round_trip_and_validate() {
        let json = br#"[{"doc_id":"d1","pages":["p0","p1"],"tables":[
            {"table_id":"t","parts":[{"page":0,"bbox":[0,0,1,1]},{"page":1,"bbox":[0,0,1,1]}]}]}]"#;
        let docs = load_documents_json(json).unwrap();
        assert_eq!(docs[0].pages[1].image_id, "p1");
        let saved = save_documents_json(&docs);
        assert_eq!(load_documents_json(&saved).unwrap(), docs);
        let bad = br#"[{"doc_id":"d","pages":["p0"],"tables":[{"table_id":"t","parts":[{"page":1,"bbox":[0,0,1,1]}]}]}]"#;
        assert!(matches!(
            load_documents_json(bad),
            Err(IoError::Document(_))
        ));
    }
}
