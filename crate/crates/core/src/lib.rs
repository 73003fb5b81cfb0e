//! Cross-lingual summarization toolkit.
//!
//! The pipeline: generate diverse candidate summaries in multiple
//! languages per document ([`generation`]), score each against the source
//! document and reference summary with tri-similarity and LaSE
//! ([`scoring`]), build positive/negative pairs over the ranked list and
//! train a scorer under a contrastive ranking loss ([`contrastive`],
//! [`training`]), then evaluate re-ranked outputs with LaSE and BERTScore
//! ([`evaluation`]). [`llm_baseline`] reproduces the LLM comparison
//! protocol programmatically, and [`corpus`] handles dataset ingestion.

pub mod contrastive;
pub mod corpus;
pub mod evaluation;
pub mod generation;
pub mod llm_baseline;
pub mod scoring;
pub mod synthetic;
pub mod training;

pub use contrastive::{
    build_pairs, loss_subgradient, ranking_loss, ContrastivePairBatch, LossConfig, PairSpec,
};
pub use corpus::{Dataset, DocumentRecord, LanguageTag, Split, SplitStats};
pub use evaluation::{bertscore, compare_reports, evaluate_system, EvalBackends, EvalReport};
pub use generation::{
    generate_candidates, stub_generate, CandidateSet, CandidateSummary, GenerationConfig,
    StubGenerator,
};
pub use scoring::{
    cosine_similarity, encode, lase, rank_candidates, tri_similarity, EmbeddingVector, Encoder,
    LaSEScore, LanguageIdentifier, ScoredCandidate, StubEncoder,
};
pub use training::{
    select_best_checkpoint, train, validate, LinearScorer, RankedDocument, TrainConfig,
    TrainHistory,
};
