//! Scorer training under the contrastive ranking loss.
//!
//! The generation backend stays frozen; candidates are pre-generated and
//! LaSE-ranked. Each step scores a batch of documents, computes the mean
//! of per-document pair losses, and applies an Adam update through the
//! scorer's parameter Jacobian. Validation re-ranks held-out candidate
//! sets every `validate_every_steps` and at the end, checkpointing each
//! time; the best checkpoint is the one with the highest mean validation
//! LaSE (earliest on ties).

pub mod checkpoint;
pub mod optimizer;
pub mod scorer;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contrastive::{
    build_pairs, loss_subgradient, ranking_loss, ContrastivePairBatch, LossConfig,
};
use crate::corpus::{DocumentRecord, LanguageTag};
use crate::generation::CandidateSet;
use crate::scoring::{
    encode, rank_candidates, token_count, Encoder, LanguageIdentifier, ScoredCandidate,
    ScoringError,
};

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use optimizer::{Adam, LrSchedule};
pub use scorer::{candidate_features, feature_dim, LinearScorer, ScoringContext, TrainableScorer};

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("invalid train config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at step {step} (documents {batch:?})")]
    NonFiniteLoss { step: u64, batch: Vec<String> },
    #[error("checkpoint io error on {path}: {detail}")]
    CheckpointIo {
        path: std::path::PathBuf,
        detail: String,
    },
    #[error("no validations recorded")]
    NoValidations,
    #[error("empty validation set")]
    EmptyValidationSet,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Training schedule and loss settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub validate_every_steps: u64,
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub seed: u64,
    pub loss: LossConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 4,
            validate_every_steps: 1000,
            learning_rate: 0.01,
            lr_schedule: LrSchedule::WarmupLinear,
            seed: 0,
            loss: LossConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        if self.epochs == 0 {
            return Err(TrainingError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainingError::InvalidConfig(
                "batch_size must be >= 1".into(),
            ));
        }
        if self.validate_every_steps == 0 {
            return Err(TrainingError::InvalidConfig(
                "validate_every_steps must be >= 1".into(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(TrainingError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Loss and validation trace of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// (step index, training loss) per step; indices strictly increasing.
    pub steps: Vec<(u64, f64)>,
    /// (step index, mean validation LaSE) per validation.
    pub validations: Vec<(u64, f64)>,
    pub best_checkpoint: String,
}

/// One document with its LaSE-ranked candidates, the unit the trainer and
/// validator consume. `candidates` is in rank order (rank 1 first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDocument {
    pub document_id: String,
    pub document: String,
    pub reference: String,
    pub target_lang: LanguageTag,
    pub candidates: Vec<ScoredCandidate>,
}

impl RankedDocument {
    /// Rank a generated candidate set for a record.
    pub fn from_candidates(
        record: &DocumentRecord,
        set: &CandidateSet,
        encoder: &dyn Encoder,
        lang_id: &dyn LanguageIdentifier,
    ) -> Result<Self, ScoringError> {
        let candidates = rank_candidates(
            set,
            &record.text,
            &record.summary,
            &record.target_lang,
            encoder,
            lang_id,
        )?;
        Ok(RankedDocument {
            document_id: record.id.clone(),
            document: record.text.clone(),
            reference: record.summary.clone(),
            target_lang: record.target_lang.clone(),
            candidates,
        })
    }
}

/// Per-document tensors precomputed once per run: candidate features in
/// rank order plus the pair set.
struct PreparedDocument {
    document_id: String,
    features: Vec<Vec<f64>>,
    pairs: Vec<crate::contrastive::PairSpec>,
    lase_values: Vec<f64>,
}

fn prepare(
    docs: &[RankedDocument],
    loss: &LossConfig,
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
) -> Result<Vec<PreparedDocument>, TrainingError> {
    docs.iter()
        .map(|doc| {
            let doc_emb = encode(&doc.document, encoder)?;
            let ref_emb = encode(&doc.reference, encoder)?;
            let context = ScoringContext {
                document_embedding: &doc_emb,
                reference_embedding: &ref_emb,
                reference_tokens: token_count(&doc.reference),
                target_lang: &doc.target_lang,
            };
            let features = doc
                .candidates
                .iter()
                .map(|c| candidate_features(&c.candidate.text, &context, encoder, lang_id))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PreparedDocument {
                document_id: doc.document_id.clone(),
                features,
                pairs: build_pairs(doc.candidates.len(), loss),
                lase_values: doc.candidates.iter().map(|c| c.lase.value).collect(),
            })
        })
        .collect()
}

/// Loss of one prepared document under the current scorer, with the
/// parameter gradient accumulated into `grad_out` (scaled by `weight`).
fn document_loss_and_grad<S: TrainableScorer>(
    scorer: &S,
    doc: &PreparedDocument,
    weight: f64,
    grad_out: &mut [f64],
) -> Result<f64, TrainingError> {
    let scores: Vec<f64> = doc.features.iter().map(|f| scorer.score(f)).collect();
    // NaN scores make every hinge comparison false and would fold into a
    // silent zero loss; surface divergence instead.
    if scores.iter().any(|s| !s.is_finite()) {
        return Ok(f64::NAN);
    }
    let batch = ContrastivePairBatch::new(scores, doc.pairs.clone())
        .expect("pair indices are in range by construction");
    let loss = ranking_loss(&batch).expect("validated batch");
    let score_grad = loss_subgradient(&batch).expect("validated batch");
    for (k, g) in score_grad.iter().enumerate() {
        if *g == 0.0 {
            continue;
        }
        let jac = scorer.score_gradient(&doc.features[k]);
        for (slot, j) in grad_out.iter_mut().zip(&jac) {
            *slot += weight * g * j;
        }
    }
    Ok(loss)
}

fn scorer_top1_lase<S: TrainableScorer>(scorer: &S, doc: &PreparedDocument) -> f64 {
    let mut best_score = f64::NEG_INFINITY;
    let mut best_lase = 0.0;
    for (features, lase) in doc.features.iter().zip(&doc.lase_values) {
        let s = scorer.score(features);
        if s > best_score {
            best_score = s;
            best_lase = *lase;
        }
    }
    best_lase
}

/// Mean LaSE of the candidates the scorer ranks first, over a prepared
/// validation set.
fn validate_prepared<S: TrainableScorer>(
    scorer: &S,
    docs: &[PreparedDocument],
) -> Result<f64, TrainingError> {
    if docs.is_empty() {
        return Err(TrainingError::EmptyValidationSet);
    }
    let total: f64 = docs.iter().map(|d| scorer_top1_lase(scorer, d)).sum();
    Ok(total / docs.len() as f64)
}

/// Mean LaSE of the top-1 re-ranked candidate per validation document.
pub fn validate<S: TrainableScorer>(
    scorer: &S,
    val_docs: &[RankedDocument],
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
) -> Result<f64, TrainingError> {
    let prepared = prepare(val_docs, &LossConfig::default(), encoder, lang_id)?;
    validate_prepared(scorer, &prepared)
}

/// Checkpoint id with the highest mean validation LaSE; earliest on ties.
pub fn select_best_checkpoint(history: &TrainHistory) -> Result<String, TrainingError> {
    let mut best: Option<(u64, f64)> = None;
    for &(step, value) in &history.validations {
        match best {
            Some((_, best_value)) if value <= best_value => {}
            _ => best = Some((step, value)),
        }
    }
    best.map(|(step, _)| checkpoint_id(step))
        .ok_or(TrainingError::NoValidations)
}

fn checkpoint_id(step: u64) -> String {
    format!("step-{step}")
}

/// Train a scorer. Runs `epochs * ceil(N / batch_size)` steps; the loss
/// per step is the mean over the batch's documents of each document's
/// pair-sum loss. Deterministic for a fixed seed: the data order is the
/// seed-determined per-epoch shuffle. Checkpoints are written under
/// `run_dir/checkpoints` when a run directory is given.
pub fn train<S>(
    scorer: &mut S,
    train_docs: &[RankedDocument],
    val_docs: &[RankedDocument],
    config: &TrainConfig,
    encoder: &dyn Encoder,
    lang_id: &dyn LanguageIdentifier,
    run_dir: Option<&Path>,
) -> Result<TrainHistory, TrainingError>
where
    S: TrainableScorer + Serialize,
{
    config.validate()?;
    if train_docs.is_empty() {
        return Err(TrainingError::EmptyTrainingSet);
    }

    let prepared_train = prepare(train_docs, &config.loss, encoder, lang_id)?;
    let prepared_val = prepare(val_docs, &config.loss, encoder, lang_id)?;

    let steps_per_epoch = prepared_train.len().div_ceil(config.batch_size) as u64;
    let total_steps = steps_per_epoch * config.epochs as u64;
    let mut adam = Adam::new(
        scorer.params().len(),
        config.learning_rate,
        config.lr_schedule,
        total_steps,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..prepared_train.len()).collect();

    let mut history = TrainHistory {
        steps: Vec::with_capacity(total_steps as usize),
        validations: Vec::new(),
        best_checkpoint: String::new(),
    };
    let mut step: u64 = 0;

    let run_validation =
        |scorer: &S, step: u64, history: &mut TrainHistory| -> Result<(), TrainingError> {
            if prepared_val.is_empty() {
                return Ok(());
            }
            let mean_lase = validate_prepared(scorer, &prepared_val)?;
            history.validations.push((step, mean_lase));
            if let Some(dir) = run_dir {
                let path = dir
                    .join("checkpoints")
                    .join(format!("{}.json", checkpoint_id(step)));
                save_checkpoint(scorer, &path)?;
            }
            log::info!("step {step}: mean validation LaSE {mean_lase:.4}");
            Ok(())
        };

    for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch_indices in order.chunks(config.batch_size) {
            step += 1;
            let weight = 1.0 / batch_indices.len() as f64;
            let mut grad = vec![0.0; scorer.params().len()];
            let mut loss = 0.0;
            for &index in batch_indices {
                loss += weight
                    * document_loss_and_grad(scorer, &prepared_train[index], weight, &mut grad)?;
            }
            if !loss.is_finite() {
                return Err(TrainingError::NonFiniteLoss {
                    step,
                    batch: batch_indices
                        .iter()
                        .map(|&i| prepared_train[i].document_id.clone())
                        .collect(),
                });
            }
            adam.apply(scorer.params_mut(), &grad);
            history.steps.push((step, loss));

            if step.is_multiple_of(config.validate_every_steps) {
                run_validation(scorer, step, &mut history)?;
            }
        }
    }

    // Final validation unless the last step already validated.
    if history.validations.last().map(|(s, _)| *s) != Some(step) {
        run_validation(scorer, step, &mut history)?;
    }

    history.best_checkpoint = match select_best_checkpoint(&history) {
        Ok(id) => id,
        Err(TrainingError::NoValidations) => String::new(),
        Err(other) => return Err(other),
    };

    if let Some(dir) = run_dir {
        let config_path = dir.join("config.json");
        let body = serde_json::to_value(config).expect("config serialization");
        std::fs::create_dir_all(dir).map_err(|e| TrainingError::CheckpointIo {
            path: dir.to_path_buf(),
            detail: e.to_string(),
        })?;
        std::fs::write(
            &config_path,
            serde_json::to_string_pretty(&body).expect("canonical config"),
        )
        .map_err(|e| TrainingError::CheckpointIo {
            path: config_path.clone(),
            detail: e.to_string(),
        })?;
        let history_path = dir.join("history.json");
        std::fs::write(
            &history_path,
            serde_json::to_string_pretty(&history).expect("history serialization"),
        )
        .map_err(|e| TrainingError::CheckpointIo {
            path: history_path.clone(),
            detail: e.to_string(),
        })?;
    }

    Ok(history)
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input has no rank variance.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman inputs must align");
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share the average.
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguageTag;
    use crate::generation::CandidateSummary;
    use crate::scoring::{ConstLangId, LaSEScore, StubEncoder};

    fn tag(s: &str) -> LanguageTag {
        LanguageTag::parse(s).unwrap()
    }

    fn ranked_doc(id: &str, lase_values: &[f64]) -> RankedDocument {
        let candidates = lase_values
            .iter()
            .enumerate()
            .map(|(i, &value)| ScoredCandidate {
                candidate: CandidateSummary {
                    text: format!("[english] candidate {i} with body words"),
                    language: tag("english"),
                    group_index: i,
                    backend_score: None,
                },
                lase: LaSEScore::from_components(value, 1.0, 1.0),
                tri_similarity: value,
                rank: i + 1,
            })
            .collect();
        RankedDocument {
            document_id: id.to_string(),
            document: "document text with several words in it".to_string(),
            reference: "reference words".to_string(),
            target_lang: tag("english"),
            candidates,
        }
    }

    #[test]
    fn config_rejects_zero_epochs() {
        let config = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            config.validate(),
            Err(TrainingError::InvalidConfig(_))
        ));
    }

    #[test]
    fn select_best_prefers_max_then_earliest() {
        let history = TrainHistory {
            steps: vec![],
            validations: vec![(1000, 0.3), (2000, 0.5), (3000, 0.5)],
            best_checkpoint: String::new(),
        };
        assert_eq!(select_best_checkpoint(&history).unwrap(), "step-2000");

        let single = TrainHistory {
            steps: vec![],
            validations: vec![(500, 0.1)],
            best_checkpoint: String::new(),
        };
        assert_eq!(select_best_checkpoint(&single).unwrap(), "step-500");

        let decreasing = TrainHistory {
            steps: vec![],
            validations: vec![(1, 0.9), (2, 0.8), (3, 0.7)],
            best_checkpoint: String::new(),
        };
        assert_eq!(select_best_checkpoint(&decreasing).unwrap(), "step-1");
    }

    #[test]
    fn select_best_requires_validations() {
        let history = TrainHistory {
            steps: vec![],
            validations: vec![],
            best_checkpoint: String::new(),
        };
        assert!(matches!(
            select_best_checkpoint(&history),
            Err(TrainingError::NoValidations)
        ));
    }

    #[test]
    fn oracle_scorer_validation_equals_mean_max_lase() {
        // A scorer that reproduces oracle LaSE order picks each
        // document's max-LaSE candidate; candidates are stored in rank
        // order so candidate 0 has the max.
        let docs = vec![ranked_doc("a", &[0.9, 0.5]), ranked_doc("b", &[0.4, 0.1])];
        // Candidate texts differ in their trailing index token, so a
        // zero scorer ties everything and picks the first (= oracle top).
        let scorer = LinearScorer::zeros(51);
        let mean = validate(&scorer, &docs, &StubEncoder::new(), &ConstLangId::new(1.0)).unwrap();
        assert!((mean - (0.9 + 0.4) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_validation_set_is_an_error() {
        let scorer = LinearScorer::zeros(51);
        assert!(matches!(
            validate(&scorer, &[], &StubEncoder::new(), &ConstLangId::new(1.0)),
            Err(TrainingError::EmptyValidationSet)
        ));
    }

    #[test]
    fn non_finite_scores_abort_with_the_offending_batch() {
        let docs = vec![ranked_doc("poisoned", &[0.9, 0.5])];
        let mut scorer = LinearScorer::zeros(51);
        scorer.params_mut()[0] = f64::NAN;
        let config = TrainConfig {
            epochs: 1,
            batch_size: 1,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let err = train(
            &mut scorer,
            &docs,
            &docs,
            &config,
            &StubEncoder::new(),
            &ConstLangId::new(1.0),
            None,
        )
        .unwrap_err();
        match err {
            TrainingError::NonFiniteLoss { step, batch } => {
                assert_eq!(step, 1);
                assert_eq!(batch, vec!["poisoned".to_string()]);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn fixed_seed_runs_produce_identical_histories() {
        let docs: Vec<RankedDocument> = (0..6)
            .map(|i| ranked_doc(&format!("d{i}"), &[0.9, 0.6, 0.3]))
            .collect();
        let config = TrainConfig {
            epochs: 2,
            batch_size: 2,
            validate_every_steps: 3,
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let encoder = StubEncoder::new();
        let lang_id = ConstLangId::new(1.0);
        let mut s1 = LinearScorer::random_init(51, 9);
        let h1 = train(&mut s1, &docs, &docs, &config, &encoder, &lang_id, None).unwrap();
        let mut s2 = LinearScorer::random_init(51, 9);
        let h2 = train(&mut s2, &docs, &docs, &config, &encoder, &lang_id, None).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(s1, s2);
        // Step indices strictly increasing.
        for pair in h1.steps.windows(2) {
            assert!(pair[0].0 < pair[1].0);
        }
        // 6 docs, batch 2, 2 epochs -> 6 steps, final validation at 6.
        assert_eq!(h1.steps.len(), 6);
        assert_eq!(
            h1.validations.iter().map(|v| v.0).collect::<Vec<_>>(),
            vec![3, 6]
        );
    }

    #[test]
    fn spearman_perfect_and_reversed() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_handles_ties_and_degenerate_input() {
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 1.0, 2.0]);
        assert!((rho - 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0], &[0.3, 0.9]), 0.0);
    }
}
