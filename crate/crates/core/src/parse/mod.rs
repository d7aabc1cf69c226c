//! Parsers from model output formats into [`TableGrid`] values.
//!
//! Both parsers collect rows of raw cells and share one first-free-slot
//! layout pass. Malformed input is repaired rather than rejected; every
//! repair is reported as a [`ParseWarning`].

mod html;
mod markdown;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::table::{build_grid, CellSpan, LogicalCell, TableGrid};
use crate::text::normalize_text;

pub use html::{parse_html_bytes, parse_html_tables};
pub use markdown::{parse_span_markdown, parse_span_markdown_bytes};

/// Upper bound applied to any declared row or column span.
pub const MAX_SPAN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WarningCode {
    NoTableFound,
    RaggedRow,
    SpanClipped,
    SpanOverlap,
    InvalidSpanAttribute,
    MalformedSpanTag,
    NestedTable,
    Truncated,
    EmptyTable,
}

impl WarningCode {
    pub fn name(self) -> &'static str {
        match self {
            WarningCode::NoTableFound => "NoTableFound",
            WarningCode::RaggedRow => "RaggedRow",
            WarningCode::SpanClipped => "SpanClipped",
            WarningCode::SpanOverlap => "SpanOverlap",
            WarningCode::InvalidSpanAttribute => "InvalidSpanAttribute",
            WarningCode::MalformedSpanTag => "MalformedSpanTag",
            WarningCode::NestedTable => "NestedTable",
            WarningCode::Truncated => "Truncated",
            WarningCode::EmptyTable => "EmptyTable",
        }
    }

    /// Whether the warning records a change made to the input.
    pub fn is_repair(self) -> bool {
        !matches!(self, WarningCode::NoTableFound | WarningCode::EmptyTable)
    }
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a warning applies. `line` is 1-based; the others are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub table: Option<usize>,
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub code: WarningCode,
    pub message: String,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParseReport {
    /// Tables in source order.
    pub grids: Vec<TableGrid>,
    pub warnings: Vec<ParseWarning>,
    pub repaired: bool,
}

impl ParseReport {
    fn new(grids: Vec<TableGrid>, warnings: Vec<ParseWarning>) -> Self {
        let repaired = warnings.iter().any(|w| w.code.is_repair());
        Self {
            grids,
            warnings,
            repaired,
        }
    }

    pub fn has_warning(&self, code: WarningCode) -> bool {
        self.warnings.iter().any(|w| w.code == code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (valid up to byte {valid_up_to})")]
    HardParseFailure { valid_up_to: usize },
}

fn decode_utf8(bytes: &[u8]) -> Result<&str, ParseError> {
    core::str::from_utf8(bytes).map_err(|e| ParseError::HardParseFailure {
        valid_up_to: e.valid_up_to(),
    })
}

#[derive(Debug, Clone, Default)]
struct Warnings(Vec<ParseWarning>);

impl Warnings {
    fn push(&mut self, code: WarningCode, location: Location, message: String) {
        self.0.push(ParseWarning {
            code,
            message,
            location,
        });
    }
}

/// Rowspan of zero extends to the last row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowSpan {
    Rows(usize),
    ToEnd,
}

#[derive(Debug, Clone)]
struct RawCell {
    text: String,
    rowspan: RowSpan,
    colspan: usize,
    header: bool,
    line: Option<usize>,
}

impl RawCell {
    fn new(text: String, line: Option<usize>) -> Self {
        Self {
            text,
            rowspan: RowSpan::Rows(1),
            colspan: 1,
            header: false,
            line,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct RawRow {
    cells: Vec<RawCell>,
    line: Option<usize>,
}

/// What an entry does when the cursor sits on a slot covered from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shadowed {
    /// Move the cursor to the next free slot.
    Skip,
    /// The entry stands for the covered slot and is dropped.
    Consume,
}

const FREE: usize = usize::MAX;

/// First-free-slot layout of raw rows into a grid.
///
/// The number of rows is fixed by the input; rowspans are clipped to it.
/// Colspans are clipped at the first occupied slot to their right. Slots
/// left uncovered become empty 1x1 cells.
fn layout(table: usize, rows: &[RawRow], policy: Shadowed, warnings: &mut Warnings) -> TableGrid {
    let n_rows = rows.len();
    // occupancy[r][c] is the index into `placed`, or FREE.
    let mut occupancy: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
    let mut placed: Vec<LogicalCell> = Vec::new();
    let at = |row: Option<usize>, col: Option<usize>, line: Option<usize>| Location {
        table: Some(table),
        row,
        col,
        line,
    };

    for (r, row) in rows.iter().enumerate() {
        let mut c = 0;
        for cell in &row.cells {
            let occupied =
                |occ: &Vec<Vec<usize>>, c: usize| occ[r].get(c).is_some_and(|&s| s != FREE);
            match policy {
                Shadowed::Skip => {
                    while occupied(&occupancy, c) {
                        c += 1;
                    }
                }
                Shadowed::Consume => {
                    if occupied(&occupancy, c) {
                        c += 1;
                        continue;
                    }
                }
            }

            let max_rows = n_rows - r;
            let height = match cell.rowspan {
                RowSpan::ToEnd => max_rows,
                RowSpan::Rows(h) if h > max_rows => {
                    warnings.push(
                        WarningCode::SpanClipped,
                        at(Some(r), Some(c), cell.line),
                        format!("rowspan {h} clipped to {max_rows} at the last row"),
                    );
                    max_rows
                }
                RowSpan::Rows(h) => h,
            };
            let mut width = 1;
            while width < cell.colspan && !occupied(&occupancy, c + width) {
                width += 1;
            }
            if width < cell.colspan {
                warnings.push(
                    WarningCode::SpanOverlap,
                    at(Some(r), Some(c), cell.line),
                    format!(
                        "colspan {} clipped to {width} by an overlapping cell",
                        cell.colspan
                    ),
                );
            }

            let idx = placed.len();
            for occ_row in &mut occupancy[r..r + height] {
                if occ_row.len() < c + width {
                    occ_row.resize(c + width, FREE);
                }
                occ_row[c..c + width].fill(idx);
            }
            placed.push(
                LogicalCell::new(
                    CellSpan::new(r, r + height - 1, c, c + width - 1),
                    normalize_text(&cell.text),
                )
                .column_header(cell.header),
            );
            c += width;
        }
    }

    let n_cols = occupancy.iter().map(Vec::len).max().unwrap_or(0);
    if n_rows == 0 || n_cols == 0 {
        warnings.push(
            WarningCode::EmptyTable,
            at(None, None, rows.first().and_then(|r| r.line)),
            String::from("table has no cells"),
        );
        return TableGrid::empty();
    }
    for (r, occ_row) in occupancy.iter_mut().enumerate() {
        occ_row.resize(n_cols, FREE);
        let mut padded = 0;
        for (c, slot) in occ_row.iter_mut().enumerate() {
            if *slot == FREE {
                *slot = placed.len();
                placed.push(LogicalCell::new(CellSpan::single(r, c), String::new()));
                padded += 1;
            }
        }
        if padded > 0 {
            warnings.push(
                WarningCode::RaggedRow,
                at(Some(r), None, rows[r].line),
                format!("row padded with {padded} empty cell(s) to width {n_cols}"),
            );
        }
    }
    match build_grid(n_rows, n_cols, placed) {
        Ok(grid) => grid,
        Err(e) => unreachable!("layout produced an invalid tiling: {e}"),
    }
}

fn no_table_found(warnings: &mut Warnings) {
    warnings.push(
        WarningCode::NoTableFound,
        Location::default(),
        String::from("input contains no table"),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn cell(text: &str, rows: usize, cols: usize) -> RawCell {
        RawCell {
            rowspan: RowSpan::Rows(rows),
            colspan: cols,
            ..RawCell::new(text.to_string(), None)
        }
    }

    fn row(cells: Vec<RawCell>) -> RawRow {
        RawRow { cells, line: None }
    }

    #[test]
    fn skip_and_consume_differ_only_on_shadowed_entries() {
        let rows = [
            row(vec![cell("a", 2, 1), cell("b", 1, 1)]),
            row(vec![cell("x", 1, 1), cell("c", 1, 1)]),
        ];
        let mut w = Warnings::default();
        let consumed = layout(0, &rows, Shadowed::Consume, &mut w);
        assert_eq!(consumed.cell_at(1, 1).text, "c");
        assert!(w.0.is_empty());

        let skipped = layout(0, &rows, Shadowed::Skip, &mut w);
        assert_eq!(skipped.n_cols(), 3);
        assert_eq!(skipped.cell_at(1, 1).text, "x");
        assert_eq!(skipped.cell_at(1, 2).text, "c");
        assert_eq!(w.0[0].code, WarningCode::RaggedRow);
    }

    #[test]
    fn colspan_clipped_by_rowspan_from_above() {
        let rows = [
            row(vec![cell("a", 1, 1), cell("b", 2, 1)]),
            row(vec![cell("c", 1, 3)]),
        ];
        let mut w = Warnings::default();
        let g = layout(0, &rows, Shadowed::Skip, &mut w);
        assert_eq!(g.cell_at(1, 0).span, CellSpan::single(1, 0));
        assert_eq!(w.0[0].code, WarningCode::SpanOverlap);
    }

    #[test]
    fn rowspan_clipped_at_last_row() {
        let rows = [row(vec![cell("a", 5, 1)])];
        let mut w = Warnings::default();
        let g = layout(0, &rows, Shadowed::Skip, &mut w);
        assert_eq!(g.size(), 1);
        assert_eq!(w.0[0].code, WarningCode::SpanClipped);
    }

    #[test]
    fn no_cells_is_empty_grid() {
        let mut w = Warnings::default();
        let g = layout(0, &[row(vec![])], Shadowed::Skip, &mut w);
        assert!(g.is_empty());
        assert_eq!(w.0[0].code, WarningCode::EmptyTable);
    }

    #[test]
    fn repaired_flag_follows_warnings() {
        let none = ParseReport::new(Vec::new(), Vec::new());
        assert!(!none.repaired);
        let mut w = Warnings::default();
        no_table_found(&mut w);
        assert!(!ParseReport::new(Vec::new(), w.0.clone()).repaired);
        w.push(WarningCode::RaggedRow, Location::default(), String::new());
        assert!(ParseReport::new(Vec::new(), w.0).repaired);
    }
}
