//! Pipe-table markdown with leading span tags.
//!
//! A cell may start with `<ROWSPAN=k>` and/or `<COLSPAN=k>`. Every slot
//! shadowed from above by a rowspan is represented by one entry in the
//! covered row, which is consumed without producing a cell. Slots to the
//! right of a colspan have no entries.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    decode_utf8, layout, no_table_found, Location, ParseError, ParseReport, RawCell, RawRow,
    RowSpan, Shadowed, WarningCode, Warnings, MAX_SPAN,
};

/// Byte offsets of `|` not preceded by a backslash.
fn pipe_positions(line: &str) -> Vec<usize> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'|' => {
                out.push(i);
                i += 1;
            }
            _ => i += 1,
        }
    }
    out
}

/// Splits a table line into raw entry texts with `\|` unescaped.
fn split_entries(line: &str) -> Vec<String> {
    let line = line.trim();
    let pipes = pipe_positions(line);
    let mut bounds: Vec<usize> = Vec::with_capacity(pipes.len() + 2);
    if pipes.first() != Some(&0) {
        bounds.push(0);
    }
    bounds.extend(pipes.iter().copied());
    let ends_with_pipe = pipes.last().is_some_and(|&p| p + 1 == line.len());
    if !ends_with_pipe {
        bounds.push(line.len());
    }
    let mut out = Vec::with_capacity(bounds.len());
    for pair in bounds.windows(2) {
        let start = if line.as_bytes().get(pair[0]) == Some(&b'|') {
            pair[0] + 1
        } else {
            pair[0]
        };
        out.push(line[start..pair[1]].replace("\\|", "|"));
    }
    out
}

fn is_separator(entries: &[String]) -> bool {
    !entries.is_empty()
        && entries.iter().all(|e| {
            let e = e.trim();
            let e = e.strip_prefix(':').unwrap_or(e);
            let e = e.strip_suffix(':').unwrap_or(e);
            !e.is_empty() && e.bytes().all(|b| b == b'-')
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpanKind {
    Row,
    Col,
}

/// Span count and bytes consumed, or `Err` for a malformed tag.
type SpanValue = Result<(usize, usize), ()>;

/// Reads one `<ROWSPAN=k>` or `<COLSPAN=k>` prefix.
///
/// `None` if the text does not start with a span tag; `Some(Err(()))` if it
/// does but the tag is malformed.
fn span_tag(text: &str) -> Option<(SpanKind, SpanValue)> {
    let head = text.get(..9)?;
    let kind = if head.eq_ignore_ascii_case("<ROWSPAN=") {
        SpanKind::Row
    } else if head.eq_ignore_ascii_case("<COLSPAN=") {
        SpanKind::Col
    } else {
        return None;
    };
    let Some(close) = text[9..].find('>') else {
        return Some((kind, Err(())));
    };
    let value = match text[9..9 + close].trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok((k, 9 + close + 1)),
        _ => Err(()),
    };
    Some((kind, value))
}

fn parse_entry(raw: &str, at: Location, warnings: &mut Warnings) -> RawCell {
    let mut text = raw.trim_start();
    let mut cell = RawCell::new(String::new(), at.line);
    while let Some((kind, parsed)) = span_tag(text) {
        let Ok((k, consumed)) = parsed else {
            let end = text.find('>').map_or(text.len(), |i| i + 1);
            warnings.push(
                WarningCode::MalformedSpanTag,
                at,
                format!("malformed span tag {:?} kept as text", &text[..end]),
            );
            break;
        };
        let k = if k > MAX_SPAN {
            warnings.push(
                WarningCode::SpanClipped,
                at,
                format!("span {k} clamped to {MAX_SPAN}"),
            );
            MAX_SPAN
        } else {
            k
        };
        match kind {
            SpanKind::Row => cell.rowspan = RowSpan::Rows(k),
            SpanKind::Col => cell.colspan = k,
        }
        text = text[consumed..].trim_start();
    }
    cell.text = String::from(text);
    cell
}

struct PendingTable {
    rows: Vec<RawRow>,
    /// Rows seen before the first separator.
    header_rows: Option<usize>,
}

fn finish_table(
    table: PendingTable,
    index: usize,
    warnings: &mut Warnings,
) -> crate::table::TableGrid {
    let mut rows = table.rows;
    if let Some(n) = table.header_rows {
        for row in &mut rows[..n] {
            for cell in &mut row.cells {
                cell.header = true;
            }
        }
    }
    layout(index, &rows, Shadowed::Consume, warnings)
}

/// Extracts every pipe table in source order.
///
/// `<md>` and `</md>` wrappers are removed first. A table is a run of
/// consecutive lines that contain an unescaped `|`.
pub fn parse_span_markdown(text: &str) -> ParseReport {
    let cleaned = text.replace("<md>", "").replace("</md>", "");
    let mut warnings = Warnings::default();
    let mut grids = Vec::new();
    let mut pending: Option<PendingTable> = None;

    for (i, line) in cleaned.lines().enumerate() {
        let line_no = i + 1;
        if pipe_positions(line).is_empty() {
            if let Some(table) = pending.take() {
                let index = grids.len();
                grids.push(finish_table(table, index, &mut warnings));
            }
            continue;
        }
        let table = pending.get_or_insert_with(|| PendingTable {
            rows: Vec::new(),
            header_rows: None,
        });
        let entries = split_entries(line);
        if is_separator(&entries) {
            if table.header_rows.is_none() {
                table.header_rows = Some(table.rows.len());
            }
            continue;
        }
        let row = table.rows.len();
        let at = |col| Location {
            table: Some(grids.len()),
            row: Some(row),
            col: Some(col),
            line: Some(line_no),
        };
        let cells = entries
            .iter()
            .enumerate()
            .map(|(col, e)| parse_entry(e, at(col), &mut warnings))
            .collect();
        table.rows.push(RawRow {
            cells,
            line: Some(line_no),
        });
    }
    if let Some(table) = pending.take() {
        let index = grids.len();
        grids.push(finish_table(table, index, &mut warnings));
    }
    if grids.is_empty() {
        no_table_found(&mut warnings);
    }
    ParseReport::new(grids, warnings.0)
}

/// As [`parse_span_markdown`], rejecting input that is not UTF-8.
pub fn parse_span_markdown_bytes(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    decode_utf8(bytes).map(parse_span_markdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{CellSpan, TableGrid};
    use alloc::vec;

    fn texts(g: &TableGrid) -> Vec<(CellSpan, &str)> {
        g.cells()
            .iter()
            .map(|c| (c.span, c.text.as_str()))
            .collect()
    }

    #[test]
    fn listing_with_rowspan_and_colspan() {
        let src = "<md> | <ROWSPAN=2> Cell | <COLSPAN=2> Cell |\n     | Cell | Cell | Cell |\n     | --- | --- | --- |\n     | Data | Data | Data | </md>";
        let r = parse_span_markdown(src);
        assert_eq!(r.grids.len(), 1);
        let g = &r.grids[0];
        assert_eq!((g.n_rows(), g.n_cols()), (3, 3));
        assert_eq!(
            texts(g),
            vec![
                (CellSpan::new(0, 1, 0, 0), "Cell"),
                (CellSpan::new(0, 0, 1, 2), "Cell"),
                (CellSpan::single(1, 1), "Cell"),
                (CellSpan::single(1, 2), "Cell"),
                (CellSpan::single(2, 0), "Data"),
                (CellSpan::single(2, 1), "Data"),
                (CellSpan::single(2, 2), "Data"),
            ]
        );
        let headers: Vec<bool> = g.cells().iter().map(|c| c.is_column_header).collect();
        assert_eq!(headers, vec![true, true, true, true, false, false, false]);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn plain_table() {
        let r = parse_span_markdown("| a | b |\n| --- | --- |\n| c | d |");
        let g = &r.grids[0];
        assert_eq!((g.n_rows(), g.n_cols(), g.size()), (2, 2, 4));
        assert!(g.cells().iter().all(|c| c.span.area() == 1));
        assert_eq!(g.cell_at(1, 1).text, "d");
    }

    #[test]
    fn colspan_first_row() {
        let r = parse_span_markdown("| <COLSPAN=2> a |\n| b | c |");
        let g = &r.grids[0];
        assert_eq!((g.n_rows(), g.n_cols()), (2, 2));
        assert_eq!(g.cells()[0].span, CellSpan::new(0, 0, 0, 1));
        assert_eq!(g.cells().len(), 3);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn malformed_tags_are_literal() {
        for tag in ["<ROWSPAN=0>", "<COLSPAN=x>", "<rowspan=-1>", "<COLSPAN=2"] {
            let r = parse_span_markdown(&format!("| {tag} a | b |"));
            assert!(r.has_warning(WarningCode::MalformedSpanTag), "{tag}");
            let g = &r.grids[0];
            assert_eq!(g.size(), 2);
            assert!(g.cells()[0].text.starts_with('<'), "{tag}");
        }
    }

    #[test]
    fn combined_and_lowercase_tags() {
        let r = parse_span_markdown("| <colspan=2><RowSpan=2> a | b |\n| | | c |");
        let g = &r.grids[0];
        assert_eq!(g.cells()[0].span, CellSpan::new(0, 1, 0, 1));
        assert_eq!(g.cell_at(1, 2).text, "c");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn escaped_pipes_and_outer_pipes_optional() {
        let r = parse_span_markdown("a \\| b | c\n--|--\nd | e");
        let g = &r.grids[0];
        assert_eq!(g.n_cols(), 2);
        assert_eq!(g.cell_at(0, 0).text, "a | b");
        assert_eq!(g.cell_at(1, 1).text, "e");
    }

    #[test]
    fn separate_tables_and_no_table() {
        let r = parse_span_markdown("| a |\n\ntext\n| b | c |\n");
        assert_eq!(r.grids.len(), 2);
        assert_eq!(r.grids[1].n_cols(), 2);
        let r = parse_span_markdown("just prose");
        assert!(r.grids.is_empty());
        assert_eq!(r.warnings[0].code, WarningCode::NoTableFound);
    }

    #[test]
    fn ragged_rows_are_padded() {
        let r = parse_span_markdown("| a | b | c |\n| d |");
        assert_eq!(r.grids[0].size(), 6);
        let w = &r.warnings[0];
        assert_eq!(w.code, WarningCode::RaggedRow);
        assert_eq!(w.location.line, Some(2));
        assert!(r.repaired);
    }
}
