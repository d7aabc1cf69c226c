//! Grid model of a recognized table.
//!
//! A [`TableGrid`] is an `n_rows x n_cols` matrix of grid positions tiled by
//! non-overlapping rectangular logical cells. Every position knows the logical
//! cell it belongs to, so the grid doubles as the matrix compared by GriTS.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::grits::Criterion;
use crate::text::normalize_text;

/// Tables with at least this many rows are "long".
pub const LONG_TABLE_MIN_ROWS: usize = 30;
/// Tables with at least this many columns are "wide".
pub const WIDE_TABLE_MIN_COLS: usize = 12;

/// Rectangular footprint of a logical cell, zero-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellSpan {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl CellSpan {
    pub const fn new(row_start: usize, row_end: usize, col_start: usize, col_end: usize) -> Self {
        Self {
            row_start,
            row_end,
            col_start,
            col_end,
        }
    }

    pub const fn single(row: usize, col: usize) -> Self {
        Self::new(row, row, col, col)
    }

    pub fn row_count(&self) -> usize {
        self.row_end + 1 - self.row_start
    }

    pub fn col_count(&self) -> usize {
        self.col_end + 1 - self.col_start
    }

    pub fn area(&self) -> usize {
        self.row_count() * self.col_count()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row_start..=self.row_end).contains(&row)
            && (self.col_start..=self.col_end).contains(&col)
    }

    fn is_ordered(&self) -> bool {
        self.row_start <= self.row_end && self.col_start <= self.col_end
    }
}

/// One logical (possibly spanning) cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalCell {
    pub span: CellSpan,
    pub text: String,
    pub is_column_header: bool,
    pub is_projected_row_header: bool,
}

impl LogicalCell {
    pub fn new(span: CellSpan, text: impl Into<String>) -> Self {
        Self {
            span,
            text: text.into(),
            is_column_header: false,
            is_projected_row_header: false,
        }
    }

    pub fn column_header(mut self, yes: bool) -> Self {
        self.is_column_header = yes;
        self
    }

    pub fn projected_row_header(mut self, yes: bool) -> Self {
        self.is_projected_row_header = yes;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {n_rows}x{n_cols}")]
    EmptyDimensions { n_rows: usize, n_cols: usize },
    #[error("span {span:?} has start after end")]
    InvalidSpan { span: CellSpan },
    #[error("span {span:?} exceeds a {n_rows}x{n_cols} grid")]
    SpanOutOfBounds {
        span: CellSpan,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("position ({row}, {col}) is covered by more than one cell")]
    OverlappingSpans { row: usize, col: usize },
    #[error("position ({row}, {col}) is not covered by any cell")]
    UncoveredPosition { row: usize, col: usize },
}

/// A validated table grid.
///
/// Cells are kept in reading order of their top-left position. The 0x0 grid
/// from [`TableGrid::empty`] stands in for a missing or unparsable prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGrid {
    n_rows: usize,
    n_cols: usize,
    cells: Vec<LogicalCell>,
    slots: Vec<usize>,
}

/// Validates a tiling and builds the grid.
pub fn build_grid(
    n_rows: usize,
    n_cols: usize,
    cells: impl IntoIterator<Item = LogicalCell>,
) -> Result<TableGrid, GridError> {
    if n_rows == 0 || n_cols == 0 {
        return Err(GridError::EmptyDimensions { n_rows, n_cols });
    }
    let mut cells: Vec<LogicalCell> = cells.into_iter().collect();
    for cell in &cells {
        let span = cell.span;
        if !span.is_ordered() {
            return Err(GridError::InvalidSpan { span });
        }
        if span.row_end >= n_rows || span.col_end >= n_cols {
            return Err(GridError::SpanOutOfBounds {
                span,
                n_rows,
                n_cols,
            });
        }
    }
    cells.sort_by_key(|c| (c.span.row_start, c.span.col_start));

    const FREE: usize = usize::MAX;
    let mut slots = vec![FREE; n_rows * n_cols];
    for (idx, cell) in cells.iter().enumerate() {
        let span = cell.span;
        for row in span.row_start..=span.row_end {
            for col in span.col_start..=span.col_end {
                let slot = &mut slots[row * n_cols + col];
                if *slot != FREE {
                    return Err(GridError::OverlappingSpans { row, col });
                }
                *slot = idx;
            }
        }
    }
    if let Some(pos) = slots.iter().position(|&s| s == FREE) {
        return Err(GridError::UncoveredPosition {
            row: pos / n_cols,
            col: pos % n_cols,
        });
    }
    Ok(TableGrid {
        n_rows,
        n_cols,
        cells,
        slots,
    })
}

impl TableGrid {
    /// The 0x0 grid.
    pub fn empty() -> Self {
        Self {
            n_rows: 0,
            n_cols: 0,
            cells: Vec::new(),
            slots: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of grid positions, `|A|`.
    pub fn size(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn is_long(&self) -> bool {
        self.n_rows >= LONG_TABLE_MIN_ROWS
    }

    pub fn is_wide(&self) -> bool {
        self.n_cols >= WIDE_TABLE_MIN_COLS
    }

    /// Logical cells in reading order of their top-left position.
    pub fn cells(&self) -> &[LogicalCell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<LogicalCell> {
        self.cells
    }

    /// Index into [`cells`](Self::cells) of the logical cell covering a position.
    ///
    /// Panics when the position is outside the grid.
    pub fn cell_index(&self, row: usize, col: usize) -> usize {
        assert!(
            row < self.n_rows && col < self.n_cols,
            "position out of grid"
        );
        self.slots[row * self.n_cols + col]
    }

    /// The logical cell covering a position.
    pub fn cell_at(&self, row: usize, col: usize) -> &LogicalCell {
        &self.cells[self.cell_index(row, col)]
    }

    /// Whether `(row, col)` is the top-left position of its logical cell.
    pub fn is_anchor(&self, row: usize, col: usize) -> bool {
        let span = self.cell_at(row, col).span;
        span.row_start == row && span.col_start == col
    }
}

/// Exact match of two grids under a criterion.
///
/// `Top` compares the footprint of every position; `Con` additionally
/// compares normalized cell text.
pub fn grid_exact_match(a: &TableGrid, b: &TableGrid, criterion: Criterion) -> bool {
    if a.n_rows != b.n_rows || a.n_cols != b.n_cols {
        return false;
    }
    // Both cell lists are in canonical order, so comparing them pairwise is
    // the same as comparing every position.
    if a.cells.len() != b.cells.len() {
        return false;
    }
    a.cells.iter().zip(&b.cells).all(|(x, y)| {
        x.span == y.span
            && match criterion {
                Criterion::Top => true,
                Criterion::Con => normalize_text(&x.text) == normalize_text(&y.text),
            }
    })
}
