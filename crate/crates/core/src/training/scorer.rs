//! Trainable re-ranking scorers.
//!
//! A scorer maps per-candidate features to a tri-similarity-compatible
//! score: like the frozen evaluation function it replaces, it sees the
//! candidate against both the reference and the source document. The
//! feature layout pairs the candidate embedding with its elementwise
//! products against the two context embeddings, keeps the raw candidate
//! embedding for plain candidate cues, and appends the scoring stack's
//! own per-candidate signals (clamped reference cosine, language
//! confidence, length penalty) so every quality axis the evaluation
//! function must internalize is linearly reachable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;
use crate::scoring::{
    cosine_similarity, encode, length_penalty, token_count, EmbeddingVector, Encoder,
    LanguageIdentifier, ScoringError,
};

/// Per-document context a candidate is featurized against.
pub struct ScoringContext<'a> {
    pub document_embedding: &'a EmbeddingVector,
    pub reference_embedding: &'a EmbeddingVector,
    pub reference_tokens: usize,
    pub target_lang: &'a LanguageTag,
}

/// Feature vector for one candidate:
/// `[c ⊙ s, c ⊙ r, c, meaning, confidence, penalty]` over unit embeddings.
pub fn candidate_features(
    candidate_text: &str,
    context: &ScoringContext<'_>,
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
) -> Result<Vec<f64>, ScoringError> {
    let candidate = encode(candidate_text, encoder)?;
    for side in [context.document_embedding, context.reference_embedding] {
        if candidate.dim() != side.dim() {
            return Err(ScoringError::DimensionMismatch {
                left: candidate.dim(),
                right: side.dim(),
            });
        }
    }
    let mut features = Vec::with_capacity(3 * candidate.dim() + 3);
    for (c, s) in candidate
        .values()
        .iter()
        .zip(context.document_embedding.values())
    {
        features.push(c * s);
    }
    for (c, r) in candidate
        .values()
        .iter()
        .zip(context.reference_embedding.values())
    {
        features.push(c * r);
    }
    features.extend_from_slice(candidate.values());
    features.push(cosine_similarity(&candidate, context.reference_embedding)?.max(0.0));
    features.push(lang_id.confidence(candidate_text, context.target_lang)?);
    features.push(length_penalty(
        token_count(candidate_text),
        context.reference_tokens,
    ));
    Ok(features)
}

/// Feature dimension produced by [`candidate_features`] for an encoder.
pub fn feature_dim(encoder: &dyn Encoder) -> usize {
    3 * encoder.dim() + 3
}

/// A scorer with a flat parameter vector and a score linear-izable
/// gradient, trainable under the contrastive ranking loss.
pub trait TrainableScorer {
    fn score(&self, features: &[f64]) -> f64;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// d(score)/d(params) at `features`.
    fn score_gradient(&self, features: &[f64]) -> Vec<f64>;
}

/// Linear scorer: `w · features + b`. Parameters are `[w..., b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub feature_dim: usize,
    params: Vec<f64>,
}

impl LinearScorer {
    /// All-zero parameters.
    pub fn zeros(feature_dim: usize) -> Self {
        LinearScorer {
            feature_dim,
            params: vec![0.0; feature_dim + 1],
        }
    }

    /// Small seeded random parameters; an untrained scorer ranks
    /// candidates essentially at random.
    pub fn random_init(feature_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..feature_dim + 1)
            .map(|_| rng.gen_range(-0.1..0.1))
            .collect();
        LinearScorer {
            feature_dim,
            params,
        }
    }

    pub fn from_params(feature_dim: usize, params: Vec<f64>) -> Option<Self> {
        (params.len() == feature_dim + 1).then_some(LinearScorer {
            feature_dim,
            params,
        })
    }
}

impl TrainableScorer for LinearScorer {
    fn score(&self, features: &[f64]) -> f64 {
        debug_assert_eq!(features.len(), self.feature_dim);
        let weights = &self.params[..self.feature_dim];
        let bias = self.params[self.feature_dim];
        weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + bias
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn score_gradient(&self, features: &[f64]) -> Vec<f64> {
        let mut grad = Vec::with_capacity(self.feature_dim + 1);
        grad.extend_from_slice(features);
        grad.push(1.0);
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::StubEncoder;

    #[test]
    fn linear_score_is_dot_plus_bias() {
        let scorer = LinearScorer::from_params(2, vec![0.5, -1.0, 0.25]).unwrap();
        let score = scorer.score(&[2.0, 3.0]);
        assert!((score - (1.0 - 3.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn score_gradient_is_features_and_one() {
        let scorer = LinearScorer::zeros(3);
        assert_eq!(
            scorer.score_gradient(&[1.0, 2.0, 3.0]),
            vec![1.0, 2.0, 3.0, 1.0]
        );
    }

    #[test]
    fn random_init_is_seed_deterministic() {
        let a = LinearScorer::random_init(4, 7);
        let b = LinearScorer::random_init(4, 7);
        let c = LinearScorer::random_init(4, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn features_concatenate_products_candidate_and_scoring_signals() {
        use crate::scoring::TagPrefixLangId;
        let encoder = StubEncoder::new();
        let doc = encode("the document text here", &encoder).unwrap();
        let reference = encode("the reference words", &encoder).unwrap();
        let bengali = LanguageTag::parse("bengali").unwrap();
        let context = ScoringContext {
            document_embedding: &doc,
            reference_embedding: &reference,
            reference_tokens: 3,
            target_lang: &bengali,
        };
        let features = candidate_features(
            "[bengali] candidate words",
            &context,
            &encoder,
            &TagPrefixLangId,
        )
        .unwrap();
        assert_eq!(features.len(), feature_dim(&encoder));
        let cand = encode("[bengali] candidate words", &encoder).unwrap();
        for (k, c) in cand.values().iter().enumerate() {
            assert!((features[k] - c * doc.values()[k]).abs() < 1e-12);
            assert!((features[16 + k] - c * reference.values()[k]).abs() < 1e-12);
            assert!((features[32 + k] - c).abs() < 1e-12);
        }
        let meaning = cosine_similarity(&cand, &reference).unwrap().max(0.0);
        assert!((features[48] - meaning).abs() < 1e-12);
        assert_eq!(features[49], 1.0, "language confidence from the tag prefix");
        assert_eq!(
            features[50], 1.0,
            "3 candidate tokens vs 3 reference tokens"
        );
    }
}
