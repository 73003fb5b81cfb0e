//! Diverse candidate-summary generation behind a pluggable backend.
//!
//! A backend produces beam-pool candidates for one document conditioned
//! on target languages and diverse-beam parameters; this module enforces
//! the per-set contract (exact cardinality, length bound, pairwise
//! distinctness) and owns the dedup retry policy and the disk cache. The
//! deterministic [`StubGenerator`] makes the whole pipeline testable
//! without neural weights.

pub mod cache;
pub mod stub;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{DocumentRecord, LanguageTag};

pub use cache::{cache_candidates, cache_path, load_candidates};
pub use stub::{stub_generate, StubGenerator};

/// Errors raised during candidate generation and caching.
#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("backend failure: {0}")]
    BackendFailure(String),
    #[error(
        "degenerate output for document {document_id}: only {distinct} distinct candidates, {requested} requested"
    )]
    DegenerateOutput {
        document_id: String,
        distinct: usize,
        requested: usize,
    },
    #[error("corrupt cache file {path}: {detail}")]
    CorruptCache {
        path: std::path::PathBuf,
        detail: String,
    },
    #[error("cache io error on {path}: {source}")]
    CacheIo {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

/// Diverse-beam generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub num_candidates: usize,
    pub num_beam_groups: usize,
    /// Token cap per candidate, under the backend's counting tokenizer.
    pub max_length: usize,
    pub diversity_penalty: f64,
    pub target_languages: Vec<LanguageTag>,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            num_candidates: 8,
            num_beam_groups: 8,
            max_length: 80,
            diversity_penalty: 1.0,
            target_languages: Vec::new(),
            seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.num_candidates == 0 || self.num_beam_groups == 0 {
            return Err(GenerationError::InvalidConfig(
                "num_candidates and num_beam_groups must be positive".to_string(),
            ));
        }
        if self.num_candidates != self.num_beam_groups {
            return Err(GenerationError::InvalidConfig(format!(
                "one candidate per beam group required: {} candidates vs {} groups",
                self.num_candidates, self.num_beam_groups
            )));
        }
        if self.max_length == 0 {
            return Err(GenerationError::InvalidConfig(
                "max_length must be at least 1".to_string(),
            ));
        }
        if self.diversity_penalty < 0.0 || self.diversity_penalty.is_nan() {
            return Err(GenerationError::InvalidConfig(
                "diversity_penalty must be nonnegative".to_string(),
            ));
        }
        if self.target_languages.is_empty() {
            return Err(GenerationError::InvalidConfig(
                "target_languages must not be empty".to_string(),
            ));
        }
        Ok(())
    }

    /// Stable hash of the canonical (key-sorted) JSON serialization; a
    /// config change invalidates cached candidate sets via mismatch.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config serialization is infallible");
        // serde_json maps are BTree-backed, so Value round-trip sorts keys.
        let canonical = serde_json::to_string(&value).expect("canonical serialization");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Language assigned to beam group `g`: groups cycle over the
    /// configured target languages.
    pub fn language_for_group(&self, group: usize) -> &LanguageTag {
        &self.target_languages[group % self.target_languages.len()]
    }
}

/// One generated candidate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub text: String,
    pub language: LanguageTag,
    pub group_index: usize,
    /// Backend-reported sequence score, when the backend exposes one.
    pub backend_score: Option<f64>,
}

/// The candidates generated for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub document_id: String,
    pub candidates: Vec<CandidateSummary>,
    pub config_fingerprint: String,
}

/// Conditional-generation backend. `generate` may return more sequences
/// than `num_candidates` (a beam pool); surplus sequences back-fill
/// duplicates during dedup.
pub trait GeneratorBackend: Sync {
    fn name(&self) -> &str;

    fn generate(
        &self,
        record: &DocumentRecord,
        config: &GenerationConfig,
    ) -> Result<Vec<CandidateSummary>, GenerationError>;

    /// Token count under the backend's own tokenizer. The default counts
    /// whitespace tokens; neural backends override to match their
    /// subword tokenizer.
    fn count_tokens(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    /// Truncate to at most `max_tokens` under the counting tokenizer.
    /// Texts already within the cap are returned unchanged.
    fn truncate(&self, text: &str, max_tokens: usize) -> String {
        if self.count_tokens(text) <= max_tokens {
            return text.to_string();
        }
        text.split_whitespace()
            .take(max_tokens)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const MAX_DEDUP_RETRIES: usize = 2;
const DIVERSITY_PENALTY_STEP: f64 = 0.5;

fn first_distinct(pool: &[CandidateSummary], want: usize) -> Vec<CandidateSummary> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(want);
    for candidate in pool {
        if out.len() == want {
            break;
        }
        if seen.insert(candidate.text.clone()) {
            out.push(candidate.clone());
        }
    }
    out
}

/// Generate exactly `num_candidates` pairwise-distinct candidates, each
/// at most `max_length` tokens.
///
/// Duplicates trigger up to two regeneration attempts with the diversity
/// penalty raised by 0.5 each; remaining duplicates are replaced by the
/// next-best distinct beam from the pool, and only when that also fails
/// is [`GenerationError::DegenerateOutput`] raised.
pub fn generate_candidates(
    record: &DocumentRecord,
    config: &GenerationConfig,
    backend: &dyn GeneratorBackend,
) -> Result<CandidateSet, GenerationError> {
    config.validate()?;
    let fingerprint = config.fingerprint();

    let mut attempt_config = config.clone();
    let mut best: Vec<CandidateSummary> = Vec::new();
    for attempt in 0..=MAX_DEDUP_RETRIES {
        let pool = backend.generate(record, &attempt_config)?;
        if pool.is_empty() {
            return Err(GenerationError::BackendFailure(format!(
                "backend {} produced no output for document {}",
                backend.name(),
                record.id
            )));
        }
        // Empty beams violate the candidate invariant and never count.
        let truncated: Vec<CandidateSummary> = pool
            .into_iter()
            .map(|mut candidate| {
                candidate.text = backend.truncate(&candidate.text, config.max_length);
                candidate
            })
            .filter(|candidate| !candidate.text.trim().is_empty())
            .collect();
        let distinct = first_distinct(&truncated, config.num_candidates);
        if distinct.len() > best.len() {
            best = distinct;
        }
        if best.len() == config.num_candidates {
            break;
        }
        if attempt < MAX_DEDUP_RETRIES {
            attempt_config.diversity_penalty += DIVERSITY_PENALTY_STEP;
        }
    }

    if best.len() < config.num_candidates {
        return Err(GenerationError::DegenerateOutput {
            document_id: record.id.clone(),
            distinct: best.len(),
            requested: config.num_candidates,
        });
    }

    Ok(CandidateSet {
        document_id: record.id.clone(),
        candidates: best,
        config_fingerprint: fingerprint,
    })
}
