//! Deterministic generation backend for tests and desk-scale runs.

use crate::corpus::DocumentRecord;

use super::{
    generate_candidates, CandidateSet, CandidateSummary, GenerationConfig, GenerationError,
    GeneratorBackend,
};

/// Split text into sentences on `.`, `!`, `?` and `。` terminators.
/// Trailing text without a terminator forms a final sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        current.push(ch);
        if matches!(ch, '.' | '!' | '?' | '。') {
            let trimmed = current.trim();
            if !trimmed.is_empty() {
                sentences.push(trimmed.to_string());
            }
            current.clear();
        }
    }
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    sentences
}

/// Backend producing candidate `g` from the sentences of the document at
/// stride `g+1` (indices 0, g+1, 2(g+1), ...), truncated to the token cap
/// and prefixed with `[lang]` for the group's cycled target language.
///
/// Distinctness comes from the stride construction plus the language
/// prefix; single-sentence documents with repeated languages collapse and
/// surface as `DegenerateOutput` from [`generate_candidates`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

impl StubGenerator {
    pub fn new() -> Self {
        StubGenerator
    }
}

impl GeneratorBackend for StubGenerator {
    fn name(&self) -> &str {
        "stub"
    }

    fn generate(
        &self,
        record: &DocumentRecord,
        config: &GenerationConfig,
    ) -> Result<Vec<CandidateSummary>, GenerationError> {
        let sentences = split_sentences(&record.text);
        if sentences.is_empty() {
            return Err(GenerationError::BackendFailure(format!(
                "document {} has no sentences",
                record.id
            )));
        }
        let mut candidates = Vec::with_capacity(config.num_candidates);
        for group in 0..config.num_candidates {
            let stride = group + 1;
            let body: Vec<&str> = sentences
                .iter()
                .step_by(stride)
                .map(String::as_str)
                .collect();
            let language = config.language_for_group(group).clone();
            // The [lang] prefix counts as one token; keep the whole
            // candidate within the cap.
            let body_budget = config.max_length.saturating_sub(1);
            let body = self.truncate(&body.join(" "), body_budget);
            let text = if body.is_empty() {
                format!("[{language}]")
            } else {
                format!("[{language}] {body}")
            };
            candidates.push(CandidateSummary {
                text,
                language,
                group_index: group,
                backend_score: None,
            });
        }
        Ok(candidates)
    }
}

/// Generate a candidate set with the deterministic stub backend.
pub fn stub_generate(
    record: &DocumentRecord,
    config: &GenerationConfig,
) -> Result<CandidateSet, GenerationError> {
    generate_candidates(record, config, &StubGenerator::new())
}
