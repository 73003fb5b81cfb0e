//! Report serialization and cross-system comparison.
//!
//! Every numeric cell renders with fixed 4-decimal formatting so emitted
//! reports diff cleanly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalReport, ReportRow};
use crate::corpus::LanguageTag;

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

fn ordered_rows<'a>(
    report: &'a EvalReport,
    pair_order: Option<&[(String, String)]>,
) -> Vec<&'a ReportRow> {
    let mut rows: Vec<&ReportRow> = report.rows.iter().collect();
    match pair_order {
        Some(order) => {
            let position: BTreeMap<(String, String), usize> = order
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, key)| (key, i))
                .collect();
            rows.sort_by_key(|row| {
                (
                    position.get(&row.pair_key()).copied().unwrap_or(usize::MAX),
                    row.pair_key(),
                )
            });
        }
        None => rows.sort_by_key(|row| row.pair_key()),
    }
    rows
}

/// Serialize a report. Rows render in the supplied pair order when one is
/// given, else lexicographically.
pub fn emit_report(
    report: &EvalReport,
    format: ReportFormat,
    pair_order: Option<&[(String, String)]>,
) -> Vec<u8> {
    let rows = ordered_rows(report, pair_order);
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("system,source_lang,target_lang,n,lase,bertscore\n");
            for row in rows {
                writeln!(
                    out,
                    "{},{},{},{},{:.4},{:.4}",
                    report.system_name,
                    row.source_lang,
                    row.target_lang,
                    row.sample_count,
                    row.mean_lase,
                    row.mean_bertscore
                )
                .expect("string write");
            }
        }
        ReportFormat::Markdown => {
            writeln!(out, "| Source-Target | n | LaSE | BERTScore |").expect("string write");
            writeln!(out, "|---|---|---|---|").expect("string write");
            for row in rows {
                writeln!(
                    out,
                    "| {}-{} | {} | {:.4} | {:.4} |",
                    row.source_lang,
                    row.target_lang,
                    row.sample_count,
                    row.mean_lase,
                    row.mean_bertscore
                )
                .expect("string write");
            }
        }
    }
    out.into_bytes()
}

/// Side-by-side markdown for two reports over the same language pairs,
/// with signed per-metric deltas (b relative to a).
pub fn emit_comparison_markdown(
    a: &EvalReport,
    b: &EvalReport,
    pair_order: Option<&[(String, String)]>,
) -> Result<Vec<u8>, EvalError> {
    let delta = compare_reports(a, b)?;
    let by_key: BTreeMap<(String, String), &DeltaRow> = delta
        .rows
        .iter()
        .map(|row| {
            (
                (row.source_lang.to_string(), row.target_lang.to_string()),
                row,
            )
        })
        .collect();

    let rows = ordered_rows(a, pair_order);
    let b_by_key: BTreeMap<(String, String), &ReportRow> =
        b.rows.iter().map(|row| (row.pair_key(), row)).collect();

    let mut out = String::new();
    writeln!(
        out,
        "| Source-Target | n | {} LaSE | {} BERTScore | {} LaSE | {} BERTScore | ΔLaSE | ΔBERTScore |",
        a.system_name, a.system_name, b.system_name, b.system_name
    )
    .expect("string write");
    writeln!(out, "|---|---|---|---|---|---|---|---|").expect("string write");
    for row in rows {
        let key = row.pair_key();
        let other = b_by_key[&key];
        let delta_row = by_key[&key];
        writeln!(
            out,
            "| {}-{} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:+.4} | {:+.4} |",
            row.source_lang,
            row.target_lang,
            row.sample_count,
            row.mean_lase,
            row.mean_bertscore,
            other.mean_lase,
            other.mean_bertscore,
            delta_row.delta_lase,
            delta_row.delta_bertscore
        )
        .expect("string write");
    }
    Ok(out.into_bytes())
}

/// Per-pair metric deltas between two reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub delta_lase: f64,
    pub delta_bertscore: f64,
}

/// Delta table with win/loss/tie summaries per metric (from the second
/// report's perspective).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    pub baseline: String,
    pub system: String,
    pub rows: Vec<DeltaRow>,
    pub lase_wins: usize,
    pub lase_losses: usize,
    pub lase_ties: usize,
    pub bertscore_wins: usize,
    pub bertscore_losses: usize,
    pub bertscore_ties: usize,
}

/// Key-joined difference `b - a` per row and metric. Both reports must
/// cover exactly the same language pairs; row order never matters.
pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<DeltaTable, EvalError> {
    let a_by_key: BTreeMap<(String, String), &ReportRow> =
        a.rows.iter().map(|row| (row.pair_key(), row)).collect();
    let b_by_key: BTreeMap<(String, String), &ReportRow> =
        b.rows.iter().map(|row| (row.pair_key(), row)).collect();

    if a_by_key.keys().collect::<Vec<_>>() != b_by_key.keys().collect::<Vec<_>>() {
        let only_a: Vec<String> = a_by_key
            .keys()
            .filter(|k| !b_by_key.contains_key(*k))
            .map(|(s, t)| format!("{s}-{t}"))
            .collect();
        let only_b: Vec<String> = b_by_key
            .keys()
            .filter(|k| !a_by_key.contains_key(*k))
            .map(|(s, t)| format!("{s}-{t}"))
            .collect();
        return Err(EvalError::RowKeyMismatch(format!(
            "only in {}: [{}]; only in {}: [{}]",
            a.system_name,
            only_a.join(", "),
            b.system_name,
            only_b.join(", ")
        )));
    }

    let mut table = DeltaTable {
        baseline: a.system_name.clone(),
        system: b.system_name.clone(),
        rows: Vec::with_capacity(a_by_key.len()),
        lase_wins: 0,
        lase_losses: 0,
        lase_ties: 0,
        bertscore_wins: 0,
        bertscore_losses: 0,
        bertscore_ties: 0,
    };
    for (key, row_a) in &a_by_key {
        let row_b = b_by_key[key];
        let delta_lase = row_b.mean_lase - row_a.mean_lase;
        let delta_bertscore = row_b.mean_bertscore - row_a.mean_bertscore;
        match delta_lase.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => table.lase_wins += 1,
            Some(std::cmp::Ordering::Less) => table.lase_losses += 1,
            _ => table.lase_ties += 1,
        }
        match delta_bertscore.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => table.bertscore_wins += 1,
            Some(std::cmp::Ordering::Less) => table.bertscore_losses += 1,
            _ => table.bertscore_ties += 1,
        }
        table.rows.push(DeltaRow {
            source_lang: row_a.source_lang.clone(),
            target_lang: row_a.target_lang.clone(),
            delta_lase,
            delta_bertscore,
        });
    }
    Ok(table)
}

/// Parse a CSV report emitted by [`emit_report`]. Numeric fields come
/// back at their 4-decimal rendering.
pub fn parse_csv_report(bytes: &[u8]) -> Result<EvalReport, EvalError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| EvalError::InvalidRow(format!("non-utf8 csv: {e}")))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "system,source_lang,target_lang,n,lase,bertscore" {
        return Err(EvalError::InvalidRow(format!(
            "unexpected csv header: {header}"
        )));
    }
    let mut system_name = String::new();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(EvalError::InvalidRow(format!(
                "expected 6 fields, got {}: {line}",
                fields.len()
            )));
        }
        system_name = fields[0].to_string();
        let parse_num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| EvalError::InvalidRow(format!("bad number {s}: {e}")))
        };
        rows.push(ReportRow {
            source_lang: LanguageTag::parse(fields[1])
                .map_err(|_| EvalError::InvalidRow(format!("bad language {}", fields[1])))?,
            target_lang: LanguageTag::parse(fields[2])
                .map_err(|_| EvalError::InvalidRow(format!("bad language {}", fields[2])))?,
            sample_count: fields[3]
                .parse()
                .map_err(|e| EvalError::InvalidRow(format!("bad count {}: {e}", fields[3])))?,
            mean_lase: parse_num(fields[4])?,
            mean_bertscore: parse_num(fields[5])?,
        });
    }
    EvalReport::new(&system_name, rows, serde_json::Value::Null)
}
