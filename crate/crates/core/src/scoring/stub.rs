//! Deterministic scoring backends for tests and desk-scale runs.

use crate::corpus::LanguageTag;

use super::{Encoder, LanguageIdentifier, ScoringError, TokenEncoder};

/// Embedding dimension of [`StubEncoder`].
pub const STUB_ENCODER_DIM: usize = 16;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Hashed bag of character trigrams projected to dimension 16.
///
/// Each window of three consecutive characters is FNV-1a hashed and its
/// count accumulated in bucket `hash % 16`; texts shorter than three
/// characters contribute a single whole-text gram. Counts are nonnegative,
/// so a non-empty text never collapses to the zero vector, and the
/// pipeline is fully deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubEncoder;

impl StubEncoder {
    pub fn new() -> Self {
        StubEncoder
    }
}

impl Encoder for StubEncoder {
    fn dim(&self) -> usize {
        STUB_ENCODER_DIM
    }

    fn encode_raw(&self, text: &str) -> Result<Vec<f64>, ScoringError> {
        let chars: Vec<char> = text.chars().collect();
        if chars.is_empty() {
            return Err(ScoringError::EmptyText);
        }
        let mut buckets = vec![0.0f64; STUB_ENCODER_DIM];
        if chars.len() < 3 {
            let gram: String = chars.iter().collect();
            buckets[(fnv1a(gram.as_bytes()) % STUB_ENCODER_DIM as u64) as usize] += 1.0;
        } else {
            for window in chars.windows(3) {
                let gram: String = window.iter().collect();
                buckets[(fnv1a(gram.as_bytes()) % STUB_ENCODER_DIM as u64) as usize] += 1.0;
            }
        }
        Ok(buckets)
    }
}

/// Token-embedding stub for BERTScore-style metrics: whitespace tokens,
/// each embedded with the trigram hash of [`StubEncoder`] and normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubTokenEncoder;

impl StubTokenEncoder {
    pub fn new() -> Self {
        StubTokenEncoder
    }
}

impl TokenEncoder for StubTokenEncoder {
    fn dim(&self) -> usize {
        STUB_ENCODER_DIM
    }

    fn encode_tokens(&self, text: &str) -> Result<Vec<Vec<f64>>, ScoringError> {
        let encoder = StubEncoder::new();
        text.split_whitespace()
            .map(|token| {
                let raw = encoder.encode_raw(token)?;
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(ScoringError::ZeroVector);
                }
                Ok(raw.into_iter().map(|v| v / norm).collect())
            })
            .collect()
    }
}

/// Language id that trusts a declared `[tag]` prefix: confidence 1 when
/// the prefix names the target language, 0 otherwise (including when no
/// prefix is present).
#[derive(Debug, Clone, Copy, Default)]
pub struct TagPrefixLangId;

impl TagPrefixLangId {
    /// Extract the declared tag from a `[tag] ...` prefix, if any.
    pub fn declared_tag(text: &str) -> Option<&str> {
        let rest = text.trim_start().strip_prefix('[')?;
        let end = rest.find(']')?;
        Some(&rest[..end])
    }
}

impl LanguageIdentifier for TagPrefixLangId {
    fn confidence(&self, text: &str, target_lang: &LanguageTag) -> Result<f64, ScoringError> {
        Ok(match Self::declared_tag(text) {
            Some(tag) if tag == target_lang.as_str() => 1.0,
            _ => 0.0,
        })
    }
}

/// Language id reporting a fixed confidence, for tests and baselines
/// where predictions carry no language marker.
#[derive(Debug, Clone, Copy)]
pub struct ConstLangId(f64);

impl ConstLangId {
    pub fn new(confidence: f64) -> Self {
        ConstLangId(confidence.clamp(0.0, 1.0))
    }
}

impl LanguageIdentifier for ConstLangId {
    fn confidence(&self, _text: &str, _target_lang: &LanguageTag) -> Result<f64, ScoringError> {
        Ok(self.0)
    }
}
