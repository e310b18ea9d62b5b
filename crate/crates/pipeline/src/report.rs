//! Evaluation report output: JSON, an aligned text table, and CSV rows for
//! parameter sweeps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use i2i_core::metrics::{EvalReport, MetricPair, SegmentMetrics};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportJson {
    pub k_values: Vec<usize>,
    pub all: SegmentJson,
    pub long_tail: SegmentJson,
    pub non_long_tail: SegmentJson,
    pub excluded_users: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SegmentJson {
    pub users: usize,
    pub recall: Vec<f64>,
    pub ndcg: Vec<f64>,
}

fn segment_json(seg: &SegmentMetrics) -> SegmentJson {
    SegmentJson {
        users: seg.users,
        recall: seg.at_k.iter().map(|p| p.recall).collect(),
        ndcg: seg.at_k.iter().map(|p| p.ndcg).collect(),
    }
}

pub fn report_to_json(report: &EvalReport) -> ReportJson {
    ReportJson {
        k_values: report.k_values.clone(),
        all: segment_json(&report.all),
        long_tail: segment_json(&report.long_tail),
        non_long_tail: segment_json(&report.non_long_tail),
        excluded_users: report.excluded_users,
    }
}

pub fn report_from_json(json: &ReportJson) -> EvalReport {
    let seg = |s: &SegmentJson| SegmentMetrics {
        users: s.users,
        at_k: s
            .recall
            .iter()
            .zip(&s.ndcg)
            .map(|(&recall, &ndcg)| MetricPair { recall, ndcg })
            .collect(),
    };
    EvalReport {
        k_values: json.k_values.clone(),
        all: seg(&json.all),
        long_tail: seg(&json.long_tail),
        non_long_tail: seg(&json.non_long_tail),
        excluded_users: json.excluded_users,
    }
}

/// Aligned table, one row per segment, Recall@K then NDCG@K columns.
pub fn render_table(report: &EvalReport) -> String {
    let mut header = vec!["segment".to_string(), "users".to_string()];
    for k in &report.k_values {
        header.push(format!("Recall@{k}"));
    }
    for k in &report.k_values {
        header.push(format!("NDCG@{k}"));
    }
    let row = |name: &str, seg: &SegmentMetrics| {
        let mut cells = vec![name.to_string(), seg.users.to_string()];
        for p in &seg.at_k {
            cells.push(format!("{:.4}", p.recall));
        }
        for p in &seg.at_k {
            cells.push(format!("{:.4}", p.ndcg));
        }
        cells
    };
    let rows = vec![
        header,
        row("all", &report.all),
        row("long_tail", &report.long_tail),
        row("non_long_tail", &report.non_long_tail),
    ];
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        for (c, cell) in r.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:>width$}", width = widths[c]);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "excluded_users  {}", report.excluded_users);
    out
}

/// CSV header for sweep output: one row per (cell, report).
pub fn sweep_csv_header(k_values: &[usize]) -> Vec<String> {
    let mut cols = vec![
        "cell".to_string(),
        "backend".to_string(),
        "recall_number".to_string(),
        "confidence_threshold".to_string(),
        "alpha".to_string(),
        "beta".to_string(),
    ];
    for seg in ["all", "long_tail", "non_long_tail"] {
        for k in k_values {
            cols.push(format!("{seg}_recall_at_{k}"));
        }
        for k in k_values {
            cols.push(format!("{seg}_ndcg_at_{k}"));
        }
    }
    cols
}

pub struct SweepRow<'a> {
    pub cell: &'a str,
    pub backend: &'a str,
    pub recall_number: usize,
    pub confidence_threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub report: &'a EvalReport,
}

pub fn sweep_csv_row(row: &SweepRow) -> Vec<String> {
    let mut cells = vec![
        row.cell.to_string(),
        row.backend.to_string(),
        row.recall_number.to_string(),
        format!("{}", row.confidence_threshold),
        format!("{}", row.alpha),
        format!("{}", row.beta),
    ];
    for seg in [&row.report.all, &row.report.long_tail, &row.report.non_long_tail] {
        for p in &seg.at_k {
            cells.push(format!("{:.6}", p.recall));
        }
        for p in &seg.at_k {
            cells.push(format!("{:.6}", p.ndcg));
        }
    }
    cells
}
