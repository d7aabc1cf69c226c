//! Tolerant HTML table extraction.
//!
//! A small tag-soup tokenizer feeds a table state machine. Only table
//! structure is interpreted; other markup contributes its text to the
//! enclosing cell. Unclosed elements are closed at end of input.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    decode_utf8, layout, no_table_found, Location, ParseError, ParseReport, RawCell, RawRow,
    RowSpan, Shadowed, WarningCode, Warnings, MAX_SPAN,
};
use crate::table::TableGrid;

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
    },
    End {
        name: String,
    },
    Text(&'a str),
}

/// Splits HTML into tags and raw text; comments and declarations vanish.
struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    /// Element whose content is skipped verbatim until its end tag.
    raw_text: Option<&'static str>,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            raw_text: None,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_past(&mut self, pattern: &str) {
        match self.rest().find(pattern) {
            Some(i) => self.pos += i + pattern.len(),
            None => self.pos = self.src.len(),
        }
    }

    fn skip_raw_text(&mut self, name: &str) {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while let Some(off) = self.src[i..].find("</") {
            let start = i + off;
            let name_end = start + 2 + name.len();
            if name_end <= bytes.len()
                && bytes[start + 2..name_end].eq_ignore_ascii_case(name.as_bytes())
            {
                self.pos = start;
                return;
            }
            i = start + 2;
        }
        self.pos = self.src.len();
    }

    fn tag_name(&mut self) -> String {
        let rest = self.rest();
        let end = rest
            .find(|c: char| c.is_ascii_whitespace() || c == '/' || c == '>')
            .unwrap_or(rest.len());
        self.pos += end;
        rest[..end].to_ascii_lowercase()
    }

    fn skip_whitespace(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn attributes(&mut self) -> Vec<(String, String)> {
        let mut attrs = Vec::new();
        loop {
            self.skip_whitespace();
            let rest = self.rest();
            if rest.is_empty() {
                return attrs;
            }
            if let Some(after) = rest.strip_prefix('>') {
                self.pos = self.src.len() - after.len();
                return attrs;
            }
            if rest.starts_with('/') {
                self.pos += 1;
                continue;
            }
            let end = rest
                .find(|c: char| c.is_ascii_whitespace() || c == '=' || c == '>' || c == '/')
                .unwrap_or(rest.len());
            let name = rest[..end].to_ascii_lowercase();
            self.pos += end.max(1);
            self.skip_whitespace();
            let mut value = String::new();
            if self.rest().starts_with('=') {
                self.pos += 1;
                self.skip_whitespace();
                let rest = self.rest();
                match rest.chars().next() {
                    Some(q @ ('"' | '\'')) => {
                        let body = &rest[1..];
                        let close = body.find(q).unwrap_or(body.len());
                        value = decode_entities(&body[..close]);
                        self.pos += 1 + (close + 1).min(body.len());
                    }
                    _ => {
                        let end = rest
                            .find(|c: char| c.is_ascii_whitespace() || c == '>')
                            .unwrap_or(rest.len());
                        value = decode_entities(&rest[..end]);
                        self.pos += end;
                    }
                }
            }
            if !name.is_empty() {
                attrs.push((name, value));
            }
        }
    }
}

impl<'a> Iterator for Tokenizer<'a> {
    type Item = Token<'a>;

    fn next(&mut self) -> Option<Token<'a>> {
        if let Some(name) = self.raw_text.take() {
            self.skip_raw_text(name);
        }
        loop {
            let rest = self.rest();
            if rest.is_empty() {
                return None;
            }
            if !rest.starts_with('<') {
                let end = rest.find('<').unwrap_or(rest.len());
                self.pos += end;
                return Some(Token::Text(&rest[..end]));
            }
            let after = &rest[1..];
            if after.starts_with("!--") {
                self.pos += 4;
                self.skip_past("-->");
                continue;
            }
            if after.starts_with('!') || after.starts_with('?') {
                self.skip_past(">");
                continue;
            }
            if let Some(end) = after.strip_prefix('/') {
                if end.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    self.pos += 2;
                    let name = self.tag_name();
                    self.skip_past(">");
                    return Some(Token::End { name });
                }
            } else if after.starts_with(|c: char| c.is_ascii_alphabetic()) {
                self.pos += 1;
                let name = self.tag_name();
                let attrs = self.attributes();
                self.raw_text = match name.as_str() {
                    "script" => Some("script"),
                    "style" => Some("style"),
                    _ => None,
                };
                return Some(Token::Start { name, attrs });
            }
            // A lone '<' is text.
            self.pos += 1;
            return Some(Token::Text(&rest[..1]));
        }
    }
}

fn decode_entity(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return Some(char::from_u32(code).unwrap_or('\u{FFFD}'));
    }
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => ' ',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "minus" => '\u{2212}',
        "plusmn" => '\u{00B1}',
        "times" => '\u{00D7}',
        "deg" => '\u{00B0}',
        "micro" => '\u{00B5}',
        _ => return None,
    })
}

/// Replaces character references; unknown ones are kept literally.
fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp + 1..];
        let semi = tail.find(';').filter(|&i| i > 0 && i <= 32);
        match semi.and_then(|i| decode_entity(&tail[..i]).map(|c| (i, c))) {
            Some((i, c)) => {
                out.push(c);
                rest = &tail[i + 1..];
            }
            None => {
                out.push('&');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

fn parse_span(value: &str) -> Option<usize> {
    let value = value.trim();
    let digits = value
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(value.len());
    if digits == 0 {
        return None;
    }
    // Saturate absurdly long digit strings; they are clamped anyway.
    Some(value[..digits].parse().unwrap_or(usize::MAX))
}

struct OpenTable {
    index: usize,
    rows: Vec<RawRow>,
    row_open: bool,
    cell: Option<RawCell>,
    in_thead: bool,
    in_caption: bool,
    /// Depth of tables nested inside the current cell.
    nested: usize,
}

impl OpenTable {
    fn new(index: usize) -> Self {
        Self {
            index,
            rows: Vec::new(),
            row_open: false,
            cell: None,
            in_thead: false,
            in_caption: false,
            nested: 0,
        }
    }

    fn close_cell(&mut self) {
        if let Some(cell) = self.cell.take() {
            if !self.row_open {
                self.open_row();
            }
            if let Some(row) = self.rows.last_mut() {
                row.cells.push(cell);
            }
        }
    }

    fn open_row(&mut self) {
        self.rows.push(RawRow::default());
        self.row_open = true;
    }

    fn close_row(&mut self) {
        self.close_cell();
        self.row_open = false;
    }

    fn push_text(&mut self, text: &str) {
        if let Some(cell) = &mut self.cell {
            cell.text.push_str(text);
        }
    }

    fn open_cell(&mut self, header: bool, attrs: &[(String, String)], warnings: &mut Warnings) {
        self.close_cell();
        if !self.row_open {
            self.open_row();
        }
        let row = self.rows.len() - 1;
        let col = self.rows[row].cells.len();
        let mut cell = RawCell::new(String::new(), None);
        cell.header = header || self.in_thead;
        for (name, value) in attrs {
            let at = Location {
                table: Some(self.index),
                row: Some(row),
                col: None,
                line: None,
            };
            match name.as_str() {
                "rowspan" => match parse_span(value) {
                    Some(0) => cell.rowspan = RowSpan::ToEnd,
                    Some(k) if k > MAX_SPAN => {
                        warnings.push(
                            WarningCode::SpanClipped,
                            at,
                            format!("rowspan {value:?} of entry {col} clamped to {MAX_SPAN}"),
                        );
                        cell.rowspan = RowSpan::Rows(MAX_SPAN);
                    }
                    Some(k) => cell.rowspan = RowSpan::Rows(k),
                    None => warnings.push(
                        WarningCode::InvalidSpanAttribute,
                        at,
                        format!("rowspan {value:?} of entry {col} treated as 1"),
                    ),
                },
                "colspan" => match parse_span(value) {
                    Some(k @ 1..=MAX_SPAN) => cell.colspan = k,
                    Some(k) if k > MAX_SPAN => {
                        warnings.push(
                            WarningCode::SpanClipped,
                            at,
                            format!("colspan {value:?} of entry {col} clamped to {MAX_SPAN}"),
                        );
                        cell.colspan = MAX_SPAN;
                    }
                    _ => warnings.push(
                        WarningCode::InvalidSpanAttribute,
                        at,
                        format!("colspan {value:?} of entry {col} treated as 1"),
                    ),
                },
                _ => {}
            }
        }
        self.cell = Some(cell);
    }

    fn finish(mut self, warnings: &mut Warnings) -> TableGrid {
        self.close_row();
        layout(self.index, &self.rows, Shadowed::Skip, warnings)
    }
}

/// Extracts every top-level `<table>` in document order.
pub fn parse_html_tables(text: &str) -> ParseReport {
    let mut warnings = Warnings::default();
    let mut stack: Vec<OpenTable> = Vec::new();
    let mut grids: Vec<TableGrid> = Vec::new();
    let mut next_index = 0;

    for token in Tokenizer::new(text) {
        let Some(table) = stack.last_mut() else {
            if matches!(&token, Token::Start { name, .. } if name == "table") {
                stack.push(OpenTable::new(next_index));
                next_index += 1;
            }
            continue;
        };
        match token {
            Token::Text(t) => {
                if !table.in_caption {
                    table.push_text(&decode_entities(t));
                }
            }
            Token::Start { name, attrs } => {
                if table.nested > 0 {
                    match name.as_str() {
                        "table" => table.nested += 1,
                        "tr" | "td" | "th" | "br" | "p" | "div" | "li" => table.push_text(" "),
                        _ => {}
                    }
                    continue;
                }
                match name.as_str() {
                    "table" => {
                        if table.cell.is_none() {
                            table.open_cell(false, &[], &mut warnings);
                        }
                        let row = table.rows.len().saturating_sub(1);
                        warnings.push(
                            WarningCode::NestedTable,
                            Location {
                                table: Some(table.index),
                                row: Some(row),
                                col: None,
                                line: None,
                            },
                            String::from("nested table flattened into cell text"),
                        );
                        table.nested = 1;
                        table.push_text(" ");
                    }
                    "tr" => {
                        table.close_row();
                        table.open_row();
                    }
                    "td" | "th" => table.open_cell(name == "th", &attrs, &mut warnings),
                    "thead" => {
                        table.close_row();
                        table.in_thead = true;
                    }
                    "tbody" | "tfoot" => {
                        table.close_row();
                        table.in_thead = false;
                    }
                    "caption" => {
                        table.close_row();
                        table.in_caption = true;
                    }
                    "br" | "p" | "div" | "li" => table.push_text(" "),
                    _ => {}
                }
            }
            Token::End { name } => {
                if table.nested > 0 {
                    match name.as_str() {
                        "table" => {
                            table.nested -= 1;
                            table.push_text(" ");
                        }
                        "td" | "th" | "p" | "div" | "li" => table.push_text(" "),
                        _ => {}
                    }
                    continue;
                }
                match name.as_str() {
                    "table" => {
                        if let Some(done) = stack.pop() {
                            grids.push(done.finish(&mut warnings));
                        }
                    }
                    "tr" => table.close_row(),
                    "td" | "th" => table.close_cell(),
                    "thead" => {
                        table.close_row();
                        table.in_thead = false;
                    }
                    "caption" => table.in_caption = false,
                    "p" | "div" | "li" => table.push_text(" "),
                    _ => {}
                }
            }
        }
    }

    while let Some(open) = stack.pop() {
        warnings.push(
            WarningCode::Truncated,
            Location {
                table: Some(open.index),
                ..Location::default()
            },
            format!(
                "input ended inside table {}; open elements closed",
                open.index
            ),
        );
        grids.push(open.finish(&mut warnings));
    }
    if next_index == 0 {
        no_table_found(&mut warnings);
    }
    ParseReport::new(grids, warnings.0)
}

/// As [`parse_html_tables`], rejecting input that is not UTF-8.
pub fn parse_html_bytes(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    decode_utf8(bytes).map(parse_html_tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::CellSpan;
    use alloc::vec;

    #[test]
    fn rowspan_example() {
        let r = parse_html_tables(
            r#"<table><tr><td rowspan="2">a</td><td>b</td></tr><tr><td>c</td></tr></table>"#,
        );
        assert_eq!(r.grids.len(), 1);
        let g = &r.grids[0];
        assert_eq!((g.n_rows(), g.n_cols()), (2, 2));
        assert_eq!(g.cell_at(1, 0).span, CellSpan::new(0, 1, 0, 0));
        assert_eq!(g.cell_at(1, 0).text, "a");
        assert_eq!(g.cell_at(1, 1).text, "c");
        assert!(r.warnings.is_empty());
        assert!(!r.repaired);
    }

    #[test]
    fn no_tables() {
        let r = parse_html_tables("<p>no tables</p>");
        assert!(r.grids.is_empty());
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].code, WarningCode::NoTableFound);
    }

    #[test]
    fn ragged_colspan_example() {
        let r = parse_html_tables(
            r#"<table><tr><td colspan="5">a</td></tr><tr><td>b</td><td>c</td></tr></table>"#,
        );
        let g = &r.grids[0];
        assert_eq!((g.n_rows(), g.n_cols()), (2, 5));
        assert_eq!(g.size(), 10);
        assert!((2..5).all(|c| g.cell_at(1, c).text.is_empty() && g.is_anchor(1, c)));
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].code, WarningCode::RaggedRow);
        assert_eq!(r.warnings[0].location.row, Some(1));
        assert!(r.repaired);
    }

    #[test]
    fn headers_from_th_and_thead() {
        let r = parse_html_tables(
            "<table><thead><tr><td>h</td></tr></thead><tbody><tr><th>x</th></tr><tr><td>y</td></tr></tbody></table>",
        );
        let g = &r.grids[0];
        let flags: Vec<bool> = g.cells().iter().map(|c| c.is_column_header).collect();
        assert_eq!(flags, vec![true, true, false]);
    }

    #[test]
    fn truncated_input_keeps_partial_table() {
        let r = parse_html_tables("<table><tr><td>a</td><td>b</td></tr><tr><td>c");
        assert_eq!(r.grids.len(), 1);
        assert_eq!(r.grids[0].n_rows(), 2);
        assert_eq!(r.grids[0].cell_at(1, 0).text, "c");
        assert!(r.has_warning(WarningCode::Truncated));
        assert!(r.has_warning(WarningCode::RaggedRow));
    }

    #[test]
    fn nested_table_flattened() {
        let r = parse_html_tables(
            "<table><tr><td>x<table><tr><td>in1</td><td>in2</td></tr></table>y</td><td>z</td></tr></table>",
        );
        assert_eq!(r.grids.len(), 1);
        let g = &r.grids[0];
        assert_eq!(g.n_cols(), 2);
        assert_eq!(g.cell_at(0, 0).text, "x in1 in2 y");
        assert!(r.has_warning(WarningCode::NestedTable));
    }

    #[test]
    fn entities_comments_and_unquoted_attributes() {
        let r = parse_html_tables(
            "<!-- c --><TABLE><tr><td colspan=2>a &amp; b&nbsp;&#60;&#x3e; &bogus;</td></tr>\
             <tr><td>1</td><TD>2</td></tr></TABLE>",
        );
        let g = &r.grids[0];
        assert_eq!(g.cell_at(0, 1).text, "a & b <> &bogus;");
        assert_eq!(g.cell_at(1, 1).text, "2");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn invalid_and_huge_spans() {
        let r = parse_html_tables(
            r#"<table><tr><td colspan="x">a</td><td rowspan="99999">b</td></tr></table>"#,
        );
        assert!(r.has_warning(WarningCode::InvalidSpanAttribute));
        assert!(r.has_warning(WarningCode::SpanClipped));
        assert_eq!(r.grids[0].size(), 2);
    }

    #[test]
    fn rowspan_zero_runs_to_last_row() {
        let r = parse_html_tables(
            r#"<table><tr><td rowspan="0">a</td><td>b</td></tr><tr><td>c</td></tr><tr><td>d</td></tr></table>"#,
        );
        let g = &r.grids[0];
        assert_eq!(g.cell_at(2, 0).span, CellSpan::new(0, 2, 0, 0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn multiple_tables_in_order_and_script_skipped() {
        let r = parse_html_tables(
            "<table><tr><td>1</td></tr></table><script>var s = '<table>';</script>\
             <table><caption>cap</caption><tr><td>2</td></tr></table>",
        );
        let texts: Vec<&str> = r.grids.iter().map(|g| g.cells()[0].text.as_str()).collect();
        assert_eq!(texts, vec!["1", "2"]);
    }

    #[test]
    fn empty_table_and_empty_rows() {
        let r = parse_html_tables("<table></table>");
        assert_eq!(r.grids, vec![TableGrid::empty()]);
        assert!(r.has_warning(WarningCode::EmptyTable));
        let r = parse_html_tables("<table><tr><td>a</td></tr><tr></tr></table>");
        assert_eq!(r.grids[0].n_rows(), 2);
    }

    #[test]
    fn non_utf8_is_hard_failure() {
        assert_eq!(
            parse_html_bytes(b"<table>\xff"),
            Err(ParseError::HardParseFailure { valid_up_to: 7 })
        );
    }
}
