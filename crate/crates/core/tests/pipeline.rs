//! Cross-module integration: generated candidates flow through LaSE
//! ranking into pair construction, the loss, and scorer training.

use conversum_core::contrastive::{
    build_pairs, loss_subgradient, ranking_loss, ContrastivePairBatch, LossConfig,
};
use conversum_core::corpus::LanguageTag;
use conversum_core::generation::{stub_generate, GenerationConfig};
use conversum_core::scoring::token_count;
use conversum_core::scoring::{encode, StubEncoder, TagPrefixLangId};
use conversum_core::synthetic::synthetic_corpus;
use conversum_core::training::{
    candidate_features, feature_dim, load_checkpoint, save_checkpoint, spearman, train, validate,
    LinearScorer, LrSchedule, RankedDocument, ScoringContext, TrainConfig, TrainableScorer,
};

fn bengali() -> LanguageTag {
    LanguageTag::parse("bengali").unwrap()
}

fn gen_config(seed: u64) -> GenerationConfig {
    GenerationConfig {
        seed,
        target_languages: vec![bengali(), LanguageTag::parse("english").unwrap()],
        ..GenerationConfig::default()
    }
}

fn ranked_corpus(count: usize, seed: u64) -> Vec<RankedDocument> {
    let encoder = StubEncoder::new();
    let lang_id = TagPrefixLangId;
    synthetic_corpus(count, &bengali(), seed)
        .iter()
        .map(|record| {
            let set = stub_generate(record, &gen_config(seed)).unwrap();
            RankedDocument::from_candidates(record, &set, &encoder, &lang_id).unwrap()
        })
        .collect()
}

#[test]
fn ranked_candidates_feed_a_meaningful_loss() {
    let docs = ranked_corpus(4, 3);
    for doc in &docs {
        // LaSE ordering is non-increasing and wrong-language candidates
        // sink to the bottom with LaSE 0.
        for pair in doc.candidates.windows(2) {
            assert!(pair[0].lase.value >= pair[1].lase.value);
        }
        let zero_count = doc
            .candidates
            .iter()
            .filter(|c| c.lase.value == 0.0)
            .count();
        assert_eq!(zero_count, 4, "wrong-language candidates score zero");

        // The oracle tri-similarity scores in rank order give a small
        // loss relative to a fully reversed ordering.
        let scores: Vec<f64> = doc.candidates.iter().map(|c| c.tri_similarity).collect();
        let config = LossConfig::default();
        let forward =
            ranking_loss(&ContrastivePairBatch::all_pairs(scores.clone(), &config)).unwrap();
        let mut reversed = scores;
        reversed.reverse();
        let backward = ranking_loss(&ContrastivePairBatch::all_pairs(reversed, &config)).unwrap();
        assert!(forward <= backward);
    }
}

/// The gradient applied per step equals the loss subgradient composed
/// with the scorer's parameter Jacobian; central finite differences
/// confirm it away from hinge kinks.
#[test]
fn parameter_gradient_matches_finite_differences() {
    let docs = ranked_corpus(3, 17);
    let encoder = StubEncoder::new();
    let loss_config = LossConfig::default();

    let lang_id = TagPrefixLangId;
    let features_per_doc: Vec<Vec<Vec<f64>>> = docs
        .iter()
        .map(|doc| {
            let doc_emb = encode(&doc.document, &encoder).unwrap();
            let ref_emb = encode(&doc.reference, &encoder).unwrap();
            let context = ScoringContext {
                document_embedding: &doc_emb,
                reference_embedding: &ref_emb,
                reference_tokens: token_count(&doc.reference),
                target_lang: &doc.target_lang,
            };
            doc.candidates
                .iter()
                .map(|c| {
                    candidate_features(&c.candidate.text, &context, &encoder, &lang_id).unwrap()
                })
                .collect()
        })
        .collect();

    let batch_loss = |scorer: &LinearScorer| -> f64 {
        let mut total = 0.0;
        for features in &features_per_doc {
            let scores: Vec<f64> = features.iter().map(|f| scorer.score(f)).collect();
            let pairs = build_pairs(scores.len(), &loss_config);
            total += ranking_loss(&ContrastivePairBatch::new(scores, pairs).unwrap()).unwrap();
        }
        total / features_per_doc.len() as f64
    };

    // The FD check is only valid away from hinge kinks: scan seeds for a
    // scorer whose every hinge argument clears 1e-3 in magnitude.
    let min_hinge = |scorer: &LinearScorer| -> f64 {
        let mut min_abs = f64::INFINITY;
        for features in &features_per_doc {
            let scores: Vec<f64> = features.iter().map(|f| scorer.score(f)).collect();
            for pair in build_pairs(scores.len(), &loss_config) {
                let arg = pair.margin - scores[pair.positive_index] + scores[pair.negative_index];
                min_abs = min_abs.min(arg.abs());
            }
        }
        min_abs
    };
    let scorer = (0..100)
        .map(|seed| LinearScorer::random_init(feature_dim(&encoder), seed))
        .find(|s| min_hinge(s) > 1e-3)
        .expect("some seed clears every hinge kink");

    // Analytic: mean over docs of sum_k g_k * dscore_k/dparams.
    let mut analytic = vec![0.0; scorer.params().len()];
    let weight = 1.0 / features_per_doc.len() as f64;
    for features in &features_per_doc {
        let scores: Vec<f64> = features.iter().map(|f| scorer.score(f)).collect();
        let pairs = build_pairs(scores.len(), &loss_config);
        let batch = ContrastivePairBatch::new(scores, pairs).unwrap();
        let g = loss_subgradient(&batch).unwrap();
        for (k, gk) in g.iter().enumerate() {
            if *gk == 0.0 {
                continue;
            }
            for (slot, j) in analytic.iter_mut().zip(scorer.score_gradient(&features[k])) {
                *slot += weight * gk * j;
            }
        }
    }

    let epsilon = 1e-5;
    for (k, expected) in analytic.iter().enumerate() {
        let mut plus = scorer.clone();
        plus.params_mut()[k] += epsilon;
        let mut minus = scorer.clone();
        minus.params_mut()[k] -= epsilon;
        let fd = (batch_loss(&plus) - batch_loss(&minus)) / (2.0 * epsilon);
        assert!(
            (fd - expected).abs() < 1e-4,
            "param {k}: fd {fd} vs analytic {expected}"
        );
    }
}

#[test]
fn training_improves_holdout_ranking_on_the_toy_task() {
    let train_docs = ranked_corpus(60, 21);
    let holdout = ranked_corpus(15, 22);
    let encoder = StubEncoder::new();

    let lang_id = TagPrefixLangId;
    let mean_holdout_spearman = |scorer: &LinearScorer| -> f64 {
        let mut total = 0.0;
        for doc in &holdout {
            let doc_emb = encode(&doc.document, &encoder).unwrap();
            let ref_emb = encode(&doc.reference, &encoder).unwrap();
            let context = ScoringContext {
                document_embedding: &doc_emb,
                reference_embedding: &ref_emb,
                reference_tokens: token_count(&doc.reference),
                target_lang: &doc.target_lang,
            };
            let scores: Vec<f64> = doc
                .candidates
                .iter()
                .map(|c| {
                    let f = candidate_features(&c.candidate.text, &context, &encoder, &lang_id)
                        .unwrap();
                    scorer.score(&f)
                })
                .collect();
            let oracle: Vec<f64> = doc.candidates.iter().map(|c| c.lase.value).collect();
            total += spearman(&scores, &oracle);
        }
        total / holdout.len() as f64
    };

    let mut scorer = LinearScorer::random_init(feature_dim(&encoder), 33);

    let config = TrainConfig {
        epochs: 10,
        batch_size: 4,
        validate_every_steps: 50,
        learning_rate: 0.02,
        lr_schedule: LrSchedule::WarmupLinear,
        seed: 33,
        loss: LossConfig::default(),
    };
    let history = train(
        &mut scorer,
        &train_docs,
        &holdout,
        &config,
        &encoder,
        &lang_id,
        None,
    )
    .unwrap();
    let after = mean_holdout_spearman(&scorer);

    assert!(after > 0.8, "trained holdout Spearman too low: {after:.3}");
    let early = history.steps[9].1;
    let late = history.steps.last().unwrap().1;
    assert!(
        late < early,
        "training loss did not drop: {early:.4} -> {late:.4}"
    );
    assert!(!history.validations.is_empty());
    assert!(history.best_checkpoint.starts_with("step-"));
}

#[test]
fn checkpoint_round_trip_reproduces_validation_scores() {
    let docs = ranked_corpus(10, 41);
    let encoder = StubEncoder::new();
    let mut scorer = LinearScorer::random_init(feature_dim(&encoder), 2);
    let config = TrainConfig {
        epochs: 2,
        batch_size: 4,
        validate_every_steps: 10,
        learning_rate: 0.02,
        ..TrainConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let lang_id = TagPrefixLangId;
    train(
        &mut scorer,
        &docs,
        &docs,
        &config,
        &encoder,
        &lang_id,
        Some(dir.path()),
    )
    .unwrap();

    let before = validate(&scorer, &docs, &encoder, &lang_id).unwrap();
    let path = dir.path().join("roundtrip.json");
    save_checkpoint(&scorer, &path).unwrap();
    let restored: LinearScorer = load_checkpoint(&path).unwrap();
    assert_eq!(restored, scorer);
    let after = validate(&restored, &docs, &encoder, &lang_id).unwrap();
    assert_eq!(before, after);

    // Training with a run dir persisted config, history and checkpoints.
    assert!(dir.path().join("config.json").is_file());
    assert!(dir.path().join("history.json").is_file());
    assert!(dir.path().join("checkpoints").is_dir());
}

/// A scorer reproducing the oracle order averages the per-document max
/// LaSE; an adversarial (reversed) scorer averages the per-document min.
#[test]
fn oracle_and_adversarial_scorers_hit_the_validation_extremes() {
    use conversum_core::corpus::{DocumentRecord, LanguageTag, Split};
    use conversum_core::generation::CandidateSummary;
    use conversum_core::scoring::{LaSEScore, ScoredCandidate, TagPrefixLangId};

    // Candidate 0 matches the reference exactly (high meaning
    // similarity), candidate 1 shares nothing with it.
    let make_doc = |id: &str, top_lase: f64, bottom_lase: f64| {
        let record = DocumentRecord {
            id: id.to_string(),
            text: "alpha beta gamma delta words".to_string(),
            summary: "alpha beta gamma".to_string(),
            source_lang: LanguageTag::parse("english").unwrap(),
            target_lang: LanguageTag::parse("english").unwrap(),
            split: Some(Split::Validation),
        };
        let candidate = |i: usize, text: &str, lase: f64| ScoredCandidate {
            candidate: CandidateSummary {
                text: text.to_string(),
                language: record.target_lang.clone(),
                group_index: i,
                backend_score: None,
            },
            lase: LaSEScore::from_components(lase, 1.0, 1.0),
            tri_similarity: lase,
            rank: i + 1,
        };
        RankedDocument {
            document_id: record.id.clone(),
            document: record.text.clone(),
            reference: record.summary.clone(),
            target_lang: record.target_lang.clone(),
            candidates: vec![
                candidate(0, "alpha beta gamma", top_lase),
                candidate(1, "zebra quokka xylo", bottom_lase),
            ],
        }
    };
    let docs = vec![make_doc("a", 0.9, 0.5), make_doc("b", 0.7, 0.1)];

    /// Scores only by the meaning-similarity feature, optionally negated.
    struct MsScorer {
        sign: f64,
        params: Vec<f64>,
    }
    impl TrainableScorer for MsScorer {
        fn score(&self, features: &[f64]) -> f64 {
            self.sign * features[48]
        }
        fn params(&self) -> &[f64] {
            &self.params
        }
        fn params_mut(&mut self) -> &mut [f64] {
            &mut self.params
        }
        fn score_gradient(&self, _features: &[f64]) -> Vec<f64> {
            vec![0.0]
        }
    }

    let encoder = StubEncoder::new();
    let oracle = MsScorer {
        sign: 1.0,
        params: vec![0.0],
    };
    let mean = validate(&oracle, &docs, &encoder, &TagPrefixLangId).unwrap();
    assert!((mean - (0.9 + 0.7) / 2.0).abs() < 1e-12);

    let adversarial = MsScorer {
        sign: -1.0,
        params: vec![0.0],
    };
    let mean = validate(&adversarial, &docs, &encoder, &TagPrefixLangId).unwrap();
    assert!((mean - (0.5 + 0.1) / 2.0).abs() < 1e-12);
}

#[test]
fn validation_bounds_bracket_any_scorer() {
    let docs = ranked_corpus(8, 55);
    let encoder = StubEncoder::new();
    let per_doc_max: f64 = docs
        .iter()
        .map(|d| {
            d.candidates
                .iter()
                .map(|c| c.lase.value)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / docs.len() as f64;
    let per_doc_min: f64 = docs
        .iter()
        .map(|d| {
            d.candidates
                .iter()
                .map(|c| c.lase.value)
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        / docs.len() as f64;

    let scorer = LinearScorer::random_init(feature_dim(&encoder), 99);
    let mean = validate(&scorer, &docs, &encoder, &TagPrefixLangId).unwrap();
    assert!(mean >= per_doc_min - 1e-12 && mean <= per_doc_max + 1e-12);
}
