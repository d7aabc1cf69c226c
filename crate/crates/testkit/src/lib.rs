//! Seeded generators, emitters and brute-force oracles shared by tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tablegrid_core::table::{build_grid, CellSpan, LogicalCell, TableGrid};

pub use rand;

/// Words without characters that carry meaning in either table syntax.
pub const VOCABULARY: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "total", "mean", "n", "p", "0.05", "12", "3.4", "1999",
    "Group", "A", "B", "control", "dose", "(mg)", "95%", "CI", "rate", "age", "sex", "x",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub max_rows: usize,
    pub max_cols: usize,
    pub max_span: usize,
    /// Chance that a free slot starts a cell larger than 1x1.
    pub span_prob: f64,
    pub empty_prob: f64,
    /// Append the cell's ordinal so no two non-empty texts are equal.
    pub unique_text: bool,
    pub max_header_rows: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            max_rows: 6,
            max_cols: 6,
            max_span: 3,
            span_prob: 0.25,
            empty_prob: 0.1,
            unique_text: false,
            max_header_rows: 2,
        }
    }
}

impl GridSpec {
    pub fn small(limit: usize) -> Self {
        Self {
            max_rows: limit,
            max_cols: limit,
            max_span: 2,
            ..Self::default()
        }
    }
}

fn random_text<R: Rng>(rng: &mut R, spec: &GridSpec, ordinal: usize) -> String {
    if rng.random_bool(spec.empty_prob) {
        return String::new();
    }
    let n = rng.random_range(1..=3);
    let mut words: Vec<&str> = (0..n)
        .map(|_| *VOCABULARY.choose(rng).expect("vocabulary is non-empty"))
        .collect();
    let ordinal = ordinal.to_string();
    if spec.unique_text {
        words.push(&ordinal);
    }
    words.join(" ")
}

/// A random valid tiling. Header rows form a prefix and no span crosses
/// the header boundary.
pub fn random_grid<R: Rng>(rng: &mut R, spec: &GridSpec) -> TableGrid {
    let n_rows = rng.random_range(1..=spec.max_rows);
    let n_cols = rng.random_range(1..=spec.max_cols);
    let header_rows = rng.random_range(0..=spec.max_header_rows.min(n_rows));
    let mut taken = vec![false; n_rows * n_cols];
    let mut cells = Vec::new();
    for r in 0..n_rows {
        let section_end = if r < header_rows { header_rows } else { n_rows };
        for c in 0..n_cols {
            if taken[r * n_cols + c] {
                continue;
            }
            let (mut h, mut w) = (1, 1);
            if rng.random_bool(spec.span_prob) {
                let max_w = (c..n_cols)
                    .take_while(|&cc| !taken[r * n_cols + cc])
                    .count();
                h = rng.random_range(1..=spec.max_span.min(section_end - r));
                w = rng.random_range(1..=spec.max_span.min(max_w));
            }
            for rr in r..r + h {
                for cc in c..c + w {
                    taken[rr * n_cols + cc] = true;
                }
            }
            let text = random_text(rng, spec, cells.len());
            cells.push(
                LogicalCell::new(CellSpan::new(r, r + h - 1, c, c + w - 1), text)
                    .column_header(r < header_rows),
            );
        }
    }
    build_grid(n_rows, n_cols, cells).expect("generator produces a tiling")
}

/// Restriction of a grid to the given rows and columns (sorted, distinct).
///
/// Cells that keep no slot disappear; the rest shrink to the kept slots.
pub fn sub_grid(grid: &TableGrid, rows: &[usize], cols: &[usize]) -> Option<TableGrid> {
    if rows.is_empty() || cols.is_empty() {
        return None;
    }
    let remap = |keep: &[usize], start: usize, end: usize| {
        let first = keep.iter().position(|&k| k >= start && k <= end)?;
        let last = keep.iter().rposition(|&k| k >= start && k <= end)?;
        Some((first, last))
    };
    let cells = grid.cells().iter().filter_map(|cell| {
        let s = cell.span;
        let (r0, r1) = remap(rows, s.row_start, s.row_end)?;
        let (c0, c1) = remap(cols, s.col_start, s.col_end)?;
        let mut out = cell.clone();
        out.span = CellSpan::new(r0, r1, c0, c1);
        Some(out)
    });
    Some(build_grid(rows.len(), cols.len(), cells).expect("restriction of a tiling is a tiling"))
}

/// A random non-empty subset of `0..n`, sorted.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    loop {
        let keep: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
        if !keep.is_empty() {
            return keep;
        }
    }
}

fn escape_html(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// HTML rendering with rowspan/colspan attributes and `<th>` headers.
pub fn render_html(grid: &TableGrid) -> String {
    let mut out = String::from("<table>");
    for r in 0..grid.n_rows() {
        out.push_str("<tr>");
        for cell in grid.cells().iter().filter(|c| c.span.row_start == r) {
            let tag = if cell.is_column_header { "th" } else { "td" };
            out.push('<');
            out.push_str(tag);
            if cell.span.row_count() > 1 {
                out.push_str(&format!(" rowspan=\"{}\"", cell.span.row_count()));
            }
            if cell.span.col_count() > 1 {
                out.push_str(&format!(" colspan=\"{}\"", cell.span.col_count()));
            }
            out.push('>');
            out.push_str(&escape_html(&cell.text));
            out.push_str(&format!("</{tag}>"));
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>");
    out
}

/// Number of leading rows whose cells are all headers.
pub fn header_row_count(grid: &TableGrid) -> usize {
    (0..grid.n_rows())
        .take_while(|&r| (0..grid.n_cols()).all(|c| grid.cell_at(r, c).is_column_header))
        .count()
}

/// Span-tagged markdown: one empty entry per slot shadowed from above and a
/// separator after the header rows, even when every row is a header.
pub fn render_span_markdown(grid: &TableGrid) -> String {
    let header_rows = header_row_count(grid);
    let mut lines = Vec::new();
    for r in 0..grid.n_rows() {
        if r == header_rows && r > 0 {
            lines.push(format!("|{}", " --- |".repeat(grid.n_cols())));
        }
        let mut entries = Vec::new();
        let mut c = 0;
        while c < grid.n_cols() {
            let cell = grid.cell_at(r, c);
            if cell.span.row_start < r {
                entries.push(String::new());
                c += 1;
                continue;
            }
            let mut entry = String::new();
            if cell.span.row_count() > 1 {
                entry.push_str(&format!("<ROWSPAN={}> ", cell.span.row_count()));
            }
            if cell.span.col_count() > 1 {
                entry.push_str(&format!("<COLSPAN={}> ", cell.span.col_count()));
            }
            entry.push_str(&cell.text.replace('|', "\\|"));
            entries.push(entry);
            c += cell.span.col_count();
        }
        lines.push(format!("| {} |", entries.join(" | ")));
    }
    if header_rows == grid.n_rows() && header_rows > 0 {
        lines.push(format!("|{}", " --- |".repeat(grid.n_cols())));
    }
    lines.join("\n")
}

/// Maximum total gain over all one-to-one partial assignments, by
/// enumeration of injections of the smaller side into the larger.
pub fn max_assignment_value(gains: &[Vec<f64>]) -> f64 {
    let n = gains.len();
    let m = gains.first().map_or(0, Vec::len);
    let transposed = n > m;
    let (rows, cols) = if transposed { (m, n) } else { (n, m) };
    let gain = |r: usize, c: usize| if transposed { gains[c][r] } else { gains[r][c] };
    fn search(
        r: usize,
        rows: usize,
        cols: usize,
        used: &mut [bool],
        gain: &dyn Fn(usize, usize) -> f64,
    ) -> f64 {
        if r == rows {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..cols {
            if !used[c] {
                used[c] = true;
                best = best.max(gain(r, c) + search(r + 1, rows, cols, used, gain));
                used[c] = false;
            }
        }
        best
    }
    if rows == 0 {
        return 0.0;
    }
    search(0, rows, cols, &mut vec![false; cols], &gain)
}

/// Shuffles a vector with the given generator and returns it.
pub fn shuffled<T, R: Rng>(rng: &mut R, mut items: Vec<T>) -> Vec<T> {
    items.shuffle(rng);
    items
}
