//! Per-piece score tables: one row per sample, BLEU-1..4 and
//! ROUGE-1/2/L columns, as aligned text or CSV.

use std::fmt::Write;

use crate::metrics::{CorrectnessReport, MetricScores};
use crate::validate::ErrorCategory;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub id: String,
    pub scores: MetricScores,
}

pub const CSV_HEADER: &str = "id,bleu1,bleu2,bleu3,bleu4,brevity_penalty,rouge1,rouge2,rougeL_precision,rougeL_recall,rougeL_f1";

/// Column means over the rows, `None` when there are none.
pub fn column_means(rows: &[ScoreRow]) -> Option<[f64; 7]> {
    if rows.is_empty() {
        return None;
    }
    let mut sums = [0.0; 7];
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row.scores.columns()) {
            *s += v;
        }
    }
    Some(sums.map(|s| s / rows.len() as f64))
}

pub fn render_csv(rows: &[ScoreRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let s = &row.scores;
        let values = [
            s.bleu[0],
            s.bleu[1],
            s.bleu[2],
            s.bleu[3],
            s.brevity_penalty,
            s.rouge_n[0],
            s.rouge_n[1],
            s.rouge_l.precision,
            s.rouge_l.recall,
            s.rouge_l.f1,
        ];
        out.push_str(&row.id);
        for v in values {
            write!(out, ",{v:.6}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn write_table(
    out: &mut String,
    title: &str,
    headers: &[&str],
    cols: std::ops::Range<usize>,
    rows: &[ScoreRow],
    means: Option<[f64; 7]>,
    width: usize,
) {
    writeln!(out, "{title}").unwrap();
    write!(out, "{:<width$}", "sample").unwrap();
    for h in headers {
        write!(out, "  {h:>7}").unwrap();
    }
    out.push('\n');
    let body = rows
        .iter()
        .map(|r| (r.id.as_str(), r.scores.columns()))
        .chain(means.map(|m| ("mean", m)));
    for (id, values) in body {
        write!(out, "{id:<width$}").unwrap();
        for v in &values[cols.clone()] {
            write!(out, "  {v:>7.3}").unwrap();
        }
        out.push('\n');
    }
}

/// Two aligned tables, BLEU then ROUGE, with a closing mean row.
pub fn render_text(rows: &[ScoreRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.id.len())
        .chain(["sample".len()])
        .max()
        .unwrap_or(0);
    let means = column_means(rows);
    let mut out = String::new();
    let bleu = ["1-gram", "2-gram", "3-gram", "4-gram"];
    write_table(&mut out, "BLEU", &bleu, 0..4, rows, means, width);
    out.push('\n');
    let rouge = ["1-gram", "2-gram", "ROUGE-L"];
    write_table(&mut out, "ROUGE", &rouge, 4..7, rows, means, width);
    out
}

/// Header line plus per-category counts.
pub fn render_correctness(report: &CorrectnessReport) -> String {
    let mut out = format!("{report}\n");
    for cat in ErrorCategory::ALL {
        if let Some(n) = report.error_histogram.get(&cat) {
            writeln!(out, "  {cat}: {n}").unwrap();
        }
    }
    out
}
