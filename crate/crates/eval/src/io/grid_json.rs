use serde::{Deserialize, Serialize};

use tablegrid_core::table::{build_grid, CellSpan, LogicalCell, TableGrid};

use super::IoError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct CellRecord {
    row_start: usize,
    row_end: usize,
    col_start: usize,
    col_end: usize,
    #[serde(default)]
    text: String,
    #[serde(default)]
    is_column_header: bool,
    #[serde(default)]
    is_projected_row_header: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct GridRecord {
    n_rows: usize,
    n_cols: usize,
    cells: Vec<CellRecord>,
}

impl GridRecord {
    pub(super) fn from_grid(grid: &TableGrid) -> Self {
        Self {
            n_rows: grid.n_rows(),
            n_cols: grid.n_cols(),
            cells: grid
                .cells()
                .iter()
                .map(|c| CellRecord {
                    row_start: c.span.row_start,
                    row_end: c.span.row_end,
                    col_start: c.span.col_start,
                    col_end: c.span.col_end,
                    text: c.text.clone(),
                    is_column_header: c.is_column_header,
                    is_projected_row_header: c.is_projected_row_header,
                })
                .collect(),
        }
    }

    /// The 0x0 record with no cells is the empty grid.
    pub(super) fn into_grid(self) -> Result<TableGrid, IoError> {
        if self.n_rows == 0 && self.n_cols == 0 && self.cells.is_empty() {
            return Ok(TableGrid::empty());
        }
        let cells = self.cells.into_iter().map(|c| {
            LogicalCell::new(
                CellSpan::new(c.row_start, c.row_end, c.col_start, c.col_end),
                c.text,
            )
            .column_header(c.is_column_header)
            .projected_row_header(c.is_projected_row_header)
        });
        Ok(build_grid(self.n_rows, self.n_cols, cells)?)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridListRecord {
    List(Vec<GridRecord>),
    Tables { tables: Vec<GridRecord> },
    Single(GridRecord),
}

fn from_json<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, IoError> {
    serde_json::from_slice(bytes).map_err(IoError::schema)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("grid records always serialize");
    out.push(b'\n');
    out
}

pub fn load_grid_json(bytes: &[u8]) -> Result<TableGrid, IoError> {
    from_json::<GridRecord>(bytes)?.into_grid()
}

/// Canonical encoding: cells in reading order of their top-left slot.
pub fn save_grid_json(grid: &TableGrid) -> Vec<u8> {
    to_json(&GridRecord::from_grid(grid))
}

/// A list of grids: a JSON array, `{"tables": [...]}`, or a single grid.
pub fn load_grid_list(bytes: &[u8]) -> Result<Vec<TableGrid>, IoError> {
    let records = match from_json::<GridListRecord>(bytes) {
        Ok(GridListRecord::List(v)) | Ok(GridListRecord::Tables { tables: v }) => v,
        Ok(GridListRecord::Single(g)) => vec![g],
        // Untagged errors say nothing useful; retry for the precise message.
        Err(_) => match from_json::<Vec<GridRecord>>(bytes) {
            Ok(v) => v,
            Err(_) => vec![from_json::<GridRecord>(bytes)?],
        },
    };
    records.into_iter().map(GridRecord::into_grid).collect()
}

pub fn save_grid_list(grids: &[TableGrid]) -> Vec<u8> {
    to_json(&grids.iter().map(GridRecord::from_grid).collect::<Vec<_>>())
}
