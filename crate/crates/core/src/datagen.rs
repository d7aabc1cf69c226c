//! Dataset construction procedures.
//!
//! * Multi-part verification: detected table parts are concatenated in
//!   contiguous runs and accepted when the normalized edit distance to the
//!   reference table text is at most 0.02.
//! * Continuation pairs: contiguous page pairs where the first page ends in
//!   a table and the second begins with one. Positives continue a table
//!   across the page break; negatives are only kept from documents that also
//!   contribute a positive.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::document::DocumentRecord;
use crate::graph::{BBox, ClassLabel};
use crate::text::{levenshtein, normalize_text};

/// Edit-distance threshold for accepting a multi-part match.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchVerdict {
    /// Levenshtein distance over the longer text's length.
    pub normalized_distance: f64,
    pub edit_distance: usize,
    pub matched: bool,
    pub threshold: f64,
}

/// Compares extracted part text with the reference table text.
///
/// Both texts are whitespace-normalized first; distance is measured over
/// Unicode scalar values.
pub fn verify_multipart_match(extracted: &str, reference: &str, threshold: f64) -> MatchVerdict {
    let a: Vec<char> = normalize_text(extracted).chars().collect();
    let b: Vec<char> = normalize_text(reference).chars().collect();
    let edit_distance = levenshtein(&a, &b);
    let longest = a.len().max(b.len());
    let normalized_distance = if longest == 0 {
        0.0
    } else {
        edit_distance as f64 / longest as f64
    };
    MatchVerdict {
        normalized_distance,
        edit_distance,
        matched: normalized_distance <= threshold,
        threshold,
    }
}

/// A contiguous run `start..end` of detected parts and its joined text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartCombination {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl PartCombination {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// All contiguous runs of parts, longest first, then by start index.
///
/// Parts are `(page_index, text)` in reading order; texts are joined with a
/// single space.
pub fn enumerate_part_combinations<S: AsRef<str>>(parts: &[(usize, S)]) -> Vec<PartCombination> {
    let n = parts.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for len in (1..=n).rev() {
        for start in 0..=n - len {
            let mut text = String::new();
            for (i, (_, t)) in parts[start..start + len].iter().enumerate() {
                if i > 0 {
                    text.push(' ');
                }
                text.push_str(t.as_ref());
            }
            out.push(PartCombination {
                start,
                end: start + len,
                text,
            });
        }
    }
    out
}

/// First combination, in enumeration order, that matches the reference.
pub fn best_part_match<S: AsRef<str>>(
    parts: &[(usize, S)],
    reference: &str,
    threshold: f64,
) -> Option<(PartCombination, MatchVerdict)> {
    enumerate_part_combinations(parts)
        .into_iter()
        .find_map(|combo| {
            let verdict = verify_multipart_match(&combo.text, reference, threshold);
            verdict.matched.then_some((combo, verdict))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairLabel {
    Positive,
    Negative,
}

impl PairLabel {
    pub fn name(self) -> &'static str {
        match self {
            PairLabel::Positive => "positive",
            PairLabel::Negative => "negative",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "positive" => Some(PairLabel::Positive),
            "negative" => Some(PairLabel::Negative),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        self == PairLabel::Positive
    }
}

/// Pages `first_page` and `first_page + 1` of a document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PagePair {
    pub doc_id: String,
    pub first_page: usize,
    pub label: PairLabel,
}

impl PagePair {
    pub fn second_page(&self) -> usize {
        self.first_page + 1
    }
}

/// Annotated extents on a page: objects plus table parts, as (is_table, box).
fn page_elements(doc: &DocumentRecord, page: usize) -> Vec<(bool, BBox)> {
    let mut out: Vec<(bool, BBox)> = doc.pages[page]
        .objects
        .iter()
        .map(|o| (o.class.is_table(), o.bbox))
        .collect();
    for table in &doc.tables {
        out.extend(
            table
                .parts
                .iter()
                .filter(|p| p.page_index == page)
                .map(|p| (true, p.bbox)),
        );
    }
    out
}

/// The lowest-reaching element on the page is a table.
pub fn page_ends_in_table(doc: &DocumentRecord, page: usize) -> bool {
    page_elements(doc, page)
        .into_iter()
        .enumerate()
        .max_by(|(ia, (_, a)), (ib, (_, b))| {
            a.y_max
                .total_cmp(&b.y_max)
                .then(a.y_min.total_cmp(&b.y_min))
                .then(ib.cmp(ia))
        })
        .is_some_and(|(_, (is_table, _))| is_table)
}

/// The highest-starting element on the page is a table.
pub fn page_begins_with_table(doc: &DocumentRecord, page: usize) -> bool {
    page_elements(doc, page)
        .into_iter()
        .enumerate()
        .min_by(|(ia, (_, a)), (ib, (_, b))| {
            a.y_min
                .total_cmp(&b.y_min)
                .then(a.y_max.total_cmp(&b.y_max))
                .then(ia.cmp(ib))
        })
        .is_some_and(|(_, (is_table, _))| is_table)
}

/// Page pairs for the cross-page continuation task.
///
/// Output is sorted by `(doc_id, first_page)` and has at most one pair per
/// key.
pub fn sample_continuation_pairs(docs: &[DocumentRecord]) -> Vec<PagePair> {
    let mut out = Vec::new();
    for doc in docs {
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for first in 0..doc.pages.len().saturating_sub(1) {
            let continues = doc
                .tables
                .iter()
                .any(|t| t.has_part_on(first) && t.has_part_on(first + 1));
            let pair = |label| PagePair {
                doc_id: doc.doc_id.clone(),
                first_page: first,
                label,
            };
            if continues {
                positives.push(pair(PairLabel::Positive));
            } else if page_ends_in_table(doc, first) && page_begins_with_table(doc, first + 1) {
                negatives.push(pair(PairLabel::Negative));
            }
        }
        if !positives.is_empty() {
            out.extend(positives);
            out.extend(negatives);
        }
    }
    out.sort_by(|a, b| match a.doc_id.cmp(&b.doc_id) {
        Ordering::Equal => a.first_page.cmp(&b.first_page),
        other => other,
    });
    out.dedup_by(|a, b| a.doc_id == b.doc_id && a.first_page == b.first_page);
    out
}

/// Whether a class counts as a table when deciding page boundaries.
pub fn is_table_class(class: ClassLabel) -> bool {
    class.is_table()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{MultiPartTable, PageAnnotation, TablePart};
    use crate::graph::{ObjectKind, PageObject};
    use crate::table::TableGrid;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn identical_texts_match() {
        let text: String = (0..100)
            .map(|i| char::from(b'a' + (i % 26) as u8))
            .collect();
        let v = verify_multipart_match(&text, &text, DEFAULT_MATCH_THRESHOLD);
        assert_eq!(v.normalized_distance, 0.0);
        assert!(v.matched);
    }

    #[test]
    fn one_edit_boundaries() {
        let short = "abcdefghijklmnopqrst";
        let mut edited = short.to_string();
        edited.replace_range(5..6, "X");
        let v = verify_multipart_match(&edited, short, DEFAULT_MATCH_THRESHOLD);
        assert_eq!(v.edit_distance, 1);
        assert_eq!(v.normalized_distance, 0.05);
        assert!(!v.matched);

        let long: String = short.repeat(5);
        let mut edited = long.clone();
        edited.replace_range(50..51, "X");
        let v = verify_multipart_match(&edited, &long, DEFAULT_MATCH_THRESHOLD);
        assert_eq!(v.normalized_distance, 0.01);
        assert!(v.matched);
    }

    #[test]
    fn both_empty_is_zero_distance() {
        let v = verify_multipart_match("  ", "", DEFAULT_MATCH_THRESHOLD);
        assert_eq!(v.normalized_distance, 0.0);
        assert!(v.matched);
    }

    #[test]
    fn combinations_order() {
        let one = enumerate_part_combinations(&[(0, "a")]);
        assert_eq!(one.len(), 1);
        let three = enumerate_part_combinations(&[(0, "a"), (1, "b"), (1, "c")]);
        let lens: Vec<usize> = three.iter().map(PartCombination::len).collect();
        assert_eq!(lens, vec![3, 2, 2, 1, 1, 1]);
        assert_eq!(three[0].text, "a b c");
        let two = enumerate_part_combinations(&[(0, "first"), (1, "second")]);
        let texts: Vec<&str> = two.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, vec!["first second", "first", "second"]);
    }

    #[test]
    fn best_match_prefers_longest() {
        let parts = [(0, "alpha beta"), (1, "gamma delta")];
        let (combo, _) = best_part_match(&parts, "alpha beta gamma delta", 0.02).unwrap();
        assert_eq!((combo.start, combo.end), (0, 2));
        let (combo, _) = best_part_match(&parts, "gamma delta", 0.02).unwrap();
        assert_eq!((combo.start, combo.end), (1, 2));
        assert!(best_part_match(&parts, "unrelated", 0.02).is_none());
    }

    fn bbox(y0: f64, y1: f64) -> BBox {
        BBox::new(0.0, y0, 100.0, y1).unwrap()
    }

    fn page(objects: Vec<PageObject>) -> PageAnnotation {
        PageAnnotation {
            objects,
            ..PageAnnotation::default()
        }
    }

    fn table(id: &str, parts: &[(usize, f64, f64)]) -> MultiPartTable {
        MultiPartTable {
            table_id: id.to_string(),
            parts: parts
                .iter()
                .map(|&(page_index, y0, y1)| TablePart {
                    page_index,
                    bbox: bbox(y0, y1),
                })
                .collect(),
            grid: TableGrid::empty(),
            html: String::new(),
        }
    }

    fn doc(id: &str, n_pages: usize, tables: Vec<MultiPartTable>) -> DocumentRecord {
        DocumentRecord {
            doc_id: id.to_string(),
            pages: (0..n_pages).map(|_| page(vec![])).collect(),
            tables,
        }
    }

    #[test]
    fn three_page_table_gives_two_positives() {
        let d = doc(
            "d",
            3,
            vec![table(
                "t",
                &[(0, 500.0, 900.0), (1, 0.0, 900.0), (2, 0.0, 300.0)],
            )],
        );
        let pairs = sample_continuation_pairs(&[d]);
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.label == PairLabel::Positive));
        assert_eq!(pairs[1].first_page, 1);
        assert_eq!(pairs[1].second_page(), 2);
    }

    #[test]
    fn positive_and_later_negative() {
        let d = doc(
            "d",
            4,
            vec![
                table("t1", &[(0, 500.0, 900.0), (1, 0.0, 200.0)]),
                table("t2", &[(2, 600.0, 900.0)]),
                table("t3", &[(3, 10.0, 300.0)]),
            ],
        );
        let pairs = sample_continuation_pairs(&[d]);
        let labels: Vec<(usize, PairLabel)> =
            pairs.iter().map(|p| (p.first_page, p.label)).collect();
        assert_eq!(
            labels,
            vec![
                (0, PairLabel::Positive),
                (1, PairLabel::Negative),
                (2, PairLabel::Negative)
            ]
        );
    }

    #[test]
    fn negatives_need_a_positive_in_the_same_document() {
        let d = doc(
            "d",
            2,
            vec![
                table("a", &[(0, 600.0, 900.0)]),
                table("b", &[(1, 0.0, 100.0)]),
            ],
        );
        assert!(sample_continuation_pairs(&[d]).is_empty());
    }

    #[test]
    fn caption_below_table_means_page_does_not_end_in_table() {
        let mut d = doc(
            "d",
            3,
            vec![
                table("t1", &[(0, 500.0, 900.0), (1, 0.0, 200.0)]),
                table("t2", &[(1, 300.0, 800.0)]),
                table("t3", &[(2, 0.0, 100.0)]),
            ],
        );
        d.pages[1].objects.push(PageObject::new(
            ClassLabel::new(ObjectKind::Caption, false),
            bbox(820.0, 850.0),
        ));
        let pairs = sample_continuation_pairs(&[d]);
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].label.is_positive());
    }

    #[test]
    fn output_sorted_by_document() {
        let docs: Vec<DocumentRecord> = ["b", "a"]
            .iter()
            .map(|id| {
                doc(
                    id,
                    2,
                    vec![table(
                        &format!("{id}t"),
                        &[(0, 0.0, 900.0), (1, 0.0, 100.0)],
                    )],
                )
            })
            .collect();
        let pairs = sample_continuation_pairs(&docs);
        assert_eq!(pairs[0].doc_id, "a");
        assert_eq!(pairs[1].doc_id, "b");
    }
}
