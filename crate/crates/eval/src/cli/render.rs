use std::fmt::Write;

use crate::evaluate::{GraphReport, GritsBlock, TableReport};
use crate::io::StatsReport;

/// Left-aligned first column, right-aligned others.
fn aligned(rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..n_cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| String::from("-"), |v| format!("{v:.4}"))
}

pub(super) fn table_report(label: &str, report: &TableReport) -> String {
    let c = &report.corpus;
    let mut header = vec![String::from("model")];
    let mut row = vec![label.to_string()];
    let mut push = |name: &str, grits: &Option<GritsBlock>, acc: Option<f64>| {
        let Some(g) = grits else { return };
        header.extend([
            format!("grits_{name}"),
            format!("pf1_{name}"),
            format!("acc_{name}"),
        ]);
        row.extend([num(g.mean), num(g.pseudo_f1.map(|p| p.f1)), num(acc)]);
    };
    push("top", &c.grits_top, c.acc_top);
    push("con", &c.grits_con, c.acc_con);
    header.extend(["samples", "failed"].map(String::from));
    row.extend([c.n_samples.to_string(), c.n_failed.to_string()]);
    aligned(&[header, row])
}

pub(super) fn graph_report(label: &str, report: &GraphReport) -> String {
    let c = &report.corpus;
    let header = [
        "model", "edge_p", "edge_r", "edge_f1", "AP", "AP50", "AP75", "samples", "failed",
    ];
    let row = vec![
        label.to_string(),
        num(Some(c.edges.precision)),
        num(Some(c.edges.recall)),
        num(Some(c.edges.f1)),
        num(c.detection.ap),
        num(c.detection.ap50),
        num(c.detection.ap75),
        c.n_samples.to_string(),
        c.n_failed.to_string(),
    ];
    aligned(&[header.map(String::from).to_vec(), row])
}

pub(super) fn stats_report(report: &StatsReport) -> String {
    let mut rows = vec![vec![String::from("statistic"), String::from("count")]];
    let mut add = |k: String, v: u64| rows.push(vec![k, v.to_string()]);
    for (split, n) in &report.samples {
        add(format!("samples {split}"), *n);
    }
    for (class, n) in &report.objects_per_class {
        add(format!("objects {class}"), *n);
    }
    for (class, n) in &report.unknown_classes {
        add(format!("unknown {class}"), *n);
    }
    add(String::from("documents"), report.documents);
    for (pages, n) in &report.tables_by_pages_spanned {
        add(format!("tables spanning {pages} pages"), *n);
    }
    add(String::from("multi-page tables"), report.multi_page_tables);
    add(String::from("grids"), report.grids);
    add(String::from("long tables"), report.long_tables);
    add(String::from("wide tables"), report.wide_tables);
    add(
        String::from("long and wide tables"),
        report.long_and_wide_tables,
    );
    aligned(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_line_up() {
        let t = aligned(&[
            vec!["a".into(), "1".into()],
            vec!["long".into(), "100".into()],
        ]);
        assert_eq!(t, "a       1\nlong  100\n");
    }
}
