//! Corpus-level evaluation: LaSE and BERTScore per language pair,
//! rendered as CSV or markdown tables and comparable across systems.

pub mod report;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocumentRecord, LanguageTag};
use crate::scoring::{lase, Encoder, LanguageIdentifier, ScoringError, TokenEncoder};

pub use report::{
    compare_reports, emit_comparison_markdown, emit_report, parse_csv_report, DeltaRow, DeltaTable,
    ReportFormat,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty text")]
    EmptyText,
    #[error("output {0} has no matching test record")]
    UnmatchedOutput(String),
    #[error("duplicate output for document {0}")]
    DuplicateOutput(String),
    #[error("report row keys differ: {0}")]
    RowKeyMismatch(String),
    #[error("a report must have at least one row")]
    EmptyReport,
    #[error("invalid report row: {0}")]
    InvalidRow(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// BERTScore for one prediction/reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Greedy-matching BERTScore over per-token embeddings.
///
/// Precision is the mean over prediction tokens of the best cosine
/// against any reference token; recall is symmetric; F1 the harmonic
/// mean. No IDF weighting and no baseline rescaling.
pub fn bertscore(
    prediction: &str,
    reference: &str,
    token_encoder: &dyn TokenEncoder,
) -> Result<BertScore, EvalError> {
    if prediction.trim().is_empty() || reference.trim().is_empty() {
        return Err(EvalError::EmptyText);
    }
    let pred = token_encoder.encode_tokens(prediction)?;
    let refr = token_encoder.encode_tokens(reference)?;
    if pred.is_empty() || refr.is_empty() {
        return Err(EvalError::EmptyText);
    }

    let precision = mean_best_cosine(&pred, &refr)?;
    let recall = mean_best_cosine(&refr, &pred)?;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(BertScore {
        precision,
        recall,
        f1,
    })
}

fn cosine(u: &[f64], v: &[f64]) -> Result<f64, ScoringError> {
    if u.len() != v.len() {
        return Err(ScoringError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(ScoringError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

fn mean_best_cosine(from: &[Vec<f64>], to: &[Vec<f64>]) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for token in from {
        let mut best = f64::NEG_INFINITY;
        for other in to {
            best = best.max(cosine(token, other)?);
        }
        total += best;
    }
    Ok(total / from.len() as f64)
}

/// One report row: a language pair with its sample count and metric means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub sample_count: usize,
    pub mean_lase: f64,
    pub mean_bertscore: f64,
}

impl ReportRow {
    fn validate(&self) -> Result<(), EvalError> {
        if self.sample_count == 0 {
            return Err(EvalError::InvalidRow(format!(
                "{}-{}: sample_count must be >= 1",
                self.source_lang, self.target_lang
            )));
        }
        if !(0.0..=1.0).contains(&self.mean_lase) {
            return Err(EvalError::InvalidRow(format!(
                "{}-{}: mean_lase {} outside [0,1]",
                self.source_lang, self.target_lang, self.mean_lase
            )));
        }
        if !(-1.0..=1.0).contains(&self.mean_bertscore) {
            return Err(EvalError::InvalidRow(format!(
                "{}-{}: mean_bertscore {} outside [-1,1]",
                self.source_lang, self.target_lang, self.mean_bertscore
            )));
        }
        Ok(())
    }

    pub fn pair_key(&self) -> (String, String) {
        (self.source_lang.to_string(), self.target_lang.to_string())
    }
}

/// Aggregated evaluation of one system over a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system_name: String,
    pub rows: Vec<ReportRow>,
    pub config_snapshot: serde_json::Value,
}

impl EvalReport {
    /// Construct a report, enforcing the row invariants (at least one
    /// row, positive sample counts, means within range).
    pub fn new(
        system_name: &str,
        rows: Vec<ReportRow>,
        config_snapshot: serde_json::Value,
    ) -> Result<Self, EvalError> {
        if rows.is_empty() {
            return Err(EvalError::EmptyReport);
        }
        for row in &rows {
            row.validate()?;
        }
        Ok(EvalReport {
            system_name: system_name.to_string(),
            rows,
            config_snapshot,
        })
    }
}

/// Scoring backends used by [`evaluate_system`].
pub struct EvalBackends<'a> {
    pub encoder: &'a dyn Encoder,
    pub token_encoder: &'a dyn TokenEncoder,
    pub lang_id: &'a dyn LanguageIdentifier,
}

/// Per-sample metric pair, exposed for callers that aggregate themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleScores {
    pub lase: f64,
    pub bertscore_f1: f64,
}

/// Score one prediction against a record's reference.
pub fn score_sample(
    prediction: &str,
    record: &DocumentRecord,
    backends: &EvalBackends<'_>,
) -> Result<SampleScores, EvalError> {
    let lase_score = lase(
        prediction,
        &record.summary,
        &record.target_lang,
        backends.encoder,
        backends.lang_id,
    )?;
    let bert = bertscore(prediction, &record.summary, backends.token_encoder)?;
    Ok(SampleScores {
        lase: lase_score.value,
        bertscore_f1: bert.f1,
    })
}

/// Evaluate system outputs against a test set, grouping means per
/// (source_lang, target_lang). Every output must match exactly one test
/// record; aggregation is key-joined, so stream order never matters.
pub fn evaluate_system(
    outputs: &[(String, String)],
    test_set: &[DocumentRecord],
    backends: &EvalBackends<'_>,
    system_name: &str,
    config_snapshot: serde_json::Value,
) -> Result<EvalReport, EvalError> {
    let by_id: HashMap<&str, &DocumentRecord> =
        test_set.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut groups: BTreeMap<(String, String), Vec<SampleScores>> = BTreeMap::new();
    for (document_id, prediction) in outputs {
        let record = by_id
            .get(document_id.as_str())
            .ok_or_else(|| EvalError::UnmatchedOutput(document_id.clone()))?;
        if seen.insert(document_id.as_str(), ()).is_some() {
            return Err(EvalError::DuplicateOutput(document_id.clone()));
        }
        let scores = score_sample(prediction, record, backends)?;
        groups
            .entry((
                record.source_lang.to_string(),
                record.target_lang.to_string(),
            ))
            .or_default()
            .push(scores);
    }

    let rows = groups
        .into_iter()
        .map(|((source, target), scores)| {
            let n = scores.len();
            ReportRow {
                source_lang: LanguageTag::parse(&source).expect("tags validated on load"),
                target_lang: LanguageTag::parse(&target).expect("tags validated on load"),
                sample_count: n,
                mean_lase: scores.iter().map(|s| s.lase).sum::<f64>() / n as f64,
                mean_bertscore: scores.iter().map(|s| s.bertscore_f1).sum::<f64>() / n as f64,
            }
        })
        .collect();

    EvalReport::new(system_name, rows, config_snapshot)
}
