//! Candidate quality measurement: multilingual embeddings, the
//! candidate/reference/document tri-similarity, LaSE, and LaSE-descending
//! candidate ranking.
//!
//! Everything here is a pure function over immutable inputs and safe for
//! arbitrary parallel invocation. Encoder and language-id backends are
//! traits so tests run on deterministic stubs with no neural weights.

pub mod stub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LanguageTag;
use crate::generation::{CandidateSet, CandidateSummary};

pub use stub::{ConstLangId, StubEncoder, StubTokenEncoder, TagPrefixLangId};

/// Errors raised by scoring operations.
#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("empty text")]
    EmptyText,
    #[error("encoder failure: {0}")]
    EncoderFailure(String),
    #[error("language-id failure: {0}")]
    LangIdFailure(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
}

/// A fixed-dimension real vector in the encoder's shared embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Wrap raw values, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self, ScoringError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScoringError::EncoderFailure(
                "non-finite embedding entry".to_string(),
            ));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> Result<f64, ScoringError> {
        if self.dim() != other.dim() {
            return Err(ScoringError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Scale to unit L2 norm. Zero vectors have no direction.
    pub fn normalized(&self) -> Result<EmbeddingVector, ScoringError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(ScoringError::ZeroVector);
        }
        Ok(EmbeddingVector {
            values: self.values.iter().map(|v| v / norm).collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> EmbeddingVector {
        EmbeddingVector {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Sentence-embedding backend mapping text from any language into a
/// shared space. Implementations report raw vectors; L2 normalization is
/// applied by [`encode`] regardless of backend.
pub trait Encoder: Sync {
    fn dim(&self) -> usize;
    fn encode_raw(&self, text: &str) -> Result<Vec<f64>, ScoringError>;
}

/// Backend exposing per-token embeddings only. [`MeanPoolEncoder`] lifts
/// it to a sentence encoder by mean pooling.
pub trait TokenEncoder: Sync {
    fn dim(&self) -> usize;
    /// Embeddings of the backend's tokens for `text`, in token order.
    fn encode_tokens(&self, text: &str) -> Result<Vec<Vec<f64>>, ScoringError>;
}

/// Sentence encoder over a token-embedding backend: mean-pool the token
/// vectors (normalization happens in [`encode`] as for any backend).
pub struct MeanPoolEncoder<T: TokenEncoder>(pub T);

impl<T: TokenEncoder> Encoder for MeanPoolEncoder<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn encode_raw(&self, text: &str) -> Result<Vec<f64>, ScoringError> {
        let tokens = self.0.encode_tokens(text)?;
        if tokens.is_empty() {
            return Err(ScoringError::EncoderFailure(
                "no tokens to pool".to_string(),
            ));
        }
        let dim = self.0.dim();
        let mut pooled = vec![0.0; dim];
        for token in &tokens {
            if token.len() != dim {
                return Err(ScoringError::DimensionMismatch {
                    left: token.len(),
                    right: dim,
                });
            }
            for (slot, v) in pooled.iter_mut().zip(token) {
                *slot += v;
            }
        }
        let n = tokens.len() as f64;
        pooled.iter_mut().for_each(|v| *v /= n);
        Ok(pooled)
    }
}

/// Language-identification backend: probability that `text` is written in
/// `target_lang`.
pub trait LanguageIdentifier: Sync {
    fn confidence(&self, text: &str, target_lang: &LanguageTag) -> Result<f64, ScoringError>;
}

/// Dispatch queue for backends that are not thread-safe: calls are
/// serialized through a lock, so a `Send`-only encoder can be shared by
/// parallel scoring code without the module assuming backend thread
/// safety.
pub struct SerializedEncoder<T>(std::sync::Mutex<T>);

impl<T> SerializedEncoder<T> {
    pub fn new(inner: T) -> Self {
        SerializedEncoder(std::sync::Mutex::new(inner))
    }
}

impl<T: SingleThreadEncoder + Send> Encoder for SerializedEncoder<T> {
    fn dim(&self) -> usize {
        self.0.lock().expect("encoder lock poisoned").dim()
    }

    fn encode_raw(&self, text: &str) -> Result<Vec<f64>, ScoringError> {
        self.0
            .lock()
            .expect("encoder lock poisoned")
            .encode_raw(text)
    }
}

/// Encoder that may only be driven from one thread at a time (mutable
/// inference state, FFI handles). Wrap in [`SerializedEncoder`] to use it
/// behind the [`Encoder`] interface.
pub trait SingleThreadEncoder {
    fn dim(&mut self) -> usize;
    fn encode_raw(&mut self, text: &str) -> Result<Vec<f64>, ScoringError>;
}

/// Embed `text` and L2-normalize, validating dimension and finiteness.
pub fn encode(text: &str, encoder: &dyn Encoder) -> Result<EmbeddingVector, ScoringError> {
    if text.trim().is_empty() {
        return Err(ScoringError::EmptyText);
    }
    let raw = encoder.encode_raw(text)?;
    if raw.len() != encoder.dim() {
        return Err(ScoringError::DimensionMismatch {
            left: raw.len(),
            right: encoder.dim(),
        });
    }
    EmbeddingVector::new(raw)?.normalized()
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, in [-1, 1]. The quotient is
/// clamped to that range: rounding can push it a few ulps past a bound
/// Cauchy-Schwarz forbids.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, ScoringError> {
    let dot = u.dot(v)?;
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return Err(ScoringError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Joint similarity of a candidate and the reference to the source
/// document: `(C·S + R·S) / (‖C‖‖S‖ + ‖R‖‖S‖)`.
///
/// On unit vectors this is the mean of `cos(C,S)` and `cos(R,S)`; it is
/// invariant to positive rescaling of `S` and to joint positive rescaling
/// of `C` and `R`, and Cauchy-Schwarz bounds it to [-1, 1].
pub fn tri_similarity(
    candidate: &EmbeddingVector,
    reference: &EmbeddingVector,
    document: &EmbeddingVector,
) -> Result<f64, ScoringError> {
    let cs = candidate.dot(document)?;
    let rs = reference.dot(document)?;
    let nc = candidate.norm();
    let nr = reference.norm();
    let ns = document.norm();
    if nc == 0.0 || nr == 0.0 || ns == 0.0 {
        return Err(ScoringError::ZeroVector);
    }
    Ok((cs + rs) / (nc * ns + nr * ns))
}

/// Whitespace token count, the length accounting used by LaSE.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// LaSE decomposition: meaning similarity × language confidence × length
/// penalty, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaSEScore {
    #[serde(rename = "ms")]
    pub meaning_similarity: f64,
    #[serde(rename = "lc")]
    pub language_confidence: f64,
    #[serde(rename = "lp")]
    pub length_penalty: f64,
    pub value: f64,
}

impl LaSEScore {
    /// Compose a score from its three components; `value` is always the
    /// exact product.
    pub fn from_components(
        meaning_similarity: f64,
        language_confidence: f64,
        length_penalty: f64,
    ) -> Self {
        LaSEScore {
            meaning_similarity,
            language_confidence,
            length_penalty,
            value: meaning_similarity * language_confidence * length_penalty,
        }
    }
}

/// Length penalty: 1 when the prediction is at least as long as the
/// reference, else `exp(1 - ref_tokens/pred_tokens)`. Only too-short
/// predictions are penalized.
pub fn length_penalty(prediction_tokens: usize, reference_tokens: usize) -> f64 {
    if prediction_tokens >= reference_tokens {
        1.0
    } else {
        (1.0 - reference_tokens as f64 / prediction_tokens as f64).exp()
    }
}

/// Score a prediction against a reference with LaSE.
///
/// Meaning similarity is the embedding cosine clamped at 0 so the score
/// stays a nonnegative quality magnitude; language confidence comes from
/// the language-id backend; the length penalty uses whitespace tokens.
pub fn lase(
    prediction: &str,
    reference: &str,
    target_lang: &LanguageTag,
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
) -> Result<LaSEScore, ScoringError> {
    if prediction.trim().is_empty() || reference.trim().is_empty() {
        return Err(ScoringError::EmptyText);
    }
    let pred_emb = encode(prediction, encoder)?;
    let ref_emb = encode(reference, encoder)?;
    let meaning = cosine_similarity(&pred_emb, &ref_emb)?.max(0.0);
    let confidence = lang_id.confidence(prediction, target_lang)?;
    let penalty = length_penalty(token_count(prediction), token_count(reference));
    Ok(LaSEScore::from_components(meaning, confidence, penalty))
}

/// One candidate with its LaSE decomposition, tri-similarity and rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: CandidateSummary,
    pub lase: LaSEScore,
    pub tri_similarity: f64,
    /// 1 = best.
    pub rank: usize,
}

/// Indices of `values` ordered descending, ties keeping original order.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..values.len()).collect();
    indices.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    indices
}

/// Score every candidate with LaSE and tri-similarity and return them in
/// LaSE-descending order with ranks 1..n. Ties keep the original
/// candidate order.
pub fn rank_candidates(
    set: &CandidateSet,
    document: &str,
    reference: &str,
    target_lang: &LanguageTag,
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
) -> Result<Vec<ScoredCandidate>, ScoringError> {
    let doc_emb = encode(document, encoder)?;
    let ref_emb = encode(reference, encoder)?;

    let mut scored: Vec<(LaSEScore, f64, &CandidateSummary)> =
        Vec::with_capacity(set.candidates.len());
    for candidate in &set.candidates {
        let score = lase(&candidate.text, reference, target_lang, encoder, lang_id)?;
        let cand_emb = encode(&candidate.text, encoder)?;
        let tri = tri_similarity(&cand_emb, &ref_emb, &doc_emb)?;
        scored.push((score, tri, candidate));
    }

    let values: Vec<f64> = scored.iter().map(|(score, _, _)| score.value).collect();
    let order = rank_order(&values);
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(position, index)| {
            let (lase, tri, candidate) = &scored[index];
            ScoredCandidate {
                candidate: (*candidate).clone(),
                lase: *lase,
                tri_similarity: *tri,
                rank: position + 1,
            }
        })
        .collect())
}

/// One line of the scored-candidate JSONL dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDumpRecord {
    pub document_id: String,
    pub candidate_text: String,
    pub language: LanguageTag,
    pub lase: LaSEScore,
    pub tri_similarity: f64,
    pub rank: usize,
}

impl ScoredDumpRecord {
    pub fn from_scored(document_id: &str, scored: &ScoredCandidate) -> Self {
        ScoredDumpRecord {
            document_id: document_id.to_string(),
            candidate_text: scored.candidate.text.clone(),
            language: scored.candidate.language.clone(),
            lase: scored.lase,
            tri_similarity: scored.tri_similarity,
            rank: scored.rank,
        }
    }
}
