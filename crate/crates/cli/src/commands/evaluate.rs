//! `evaluate`: pick each test document's top candidate (trained scorer
//! re-ranking, or the generator's first beam with `--baseline`), score
//! the picks with LaSE and BERTScore, and emit the report.

use serde_json::json;

use conversum_core::corpus::Split;
use conversum_core::evaluation::{emit_report, evaluate_system, EvalBackends, ReportFormat};
use conversum_core::generation::{cache_path, load_candidates};
use conversum_core::scoring::{encode, token_count};
use conversum_core::training::{
    candidate_features, load_checkpoint, LinearScorer, ScoringContext, TrainHistory,
    TrainableScorer,
};

use crate::commands::{load_split_records, missing_upstream, open_dataset};
use crate::config::PipelineConfig;
use crate::manifest::ManifestWriter;
use crate::CliError;

fn load_best_scorer(config: &PipelineConfig) -> Result<LinearScorer, CliError> {
    let run_dir = config.output_dir.join("train");
    let history_path = run_dir.join("history.json");
    if !history_path.is_file() {
        return Err(missing_upstream(
            "training history",
            &history_path,
            "conversum train",
        ));
    }
    let bytes = std::fs::read(&history_path)
        .map_err(|e| CliError::Runtime(format!("read {}: {e}", history_path.display())))?;
    let history: TrainHistory = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", history_path.display())))?;
    if history.best_checkpoint.is_empty() {
        return Err(CliError::Runtime(
            "training history has no best checkpoint (no validations recorded)".to_string(),
        ));
    }
    let checkpoint = run_dir
        .join("checkpoints")
        .join(format!("{}.json", history.best_checkpoint));
    if !checkpoint.is_file() {
        return Err(missing_upstream(
            "checkpoint",
            &checkpoint,
            "conversum train",
        ));
    }
    load_checkpoint(&checkpoint).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn run(config: &PipelineConfig, baseline: bool) -> Result<(), CliError> {
    let manifest = ManifestWriter::start("evaluate", config.snapshot());
    let dataset = open_dataset(config)?;
    let encoder = config.build_encoder()?;
    let token_encoder = config.build_token_encoder()?;
    let lang_id = config.build_lang_id()?;
    let fingerprint = config.generation.fingerprint();

    let scorer = if baseline {
        None
    } else {
        Some(load_best_scorer(config)?)
    };

    let (test_records, _) = load_split_records(&dataset, Split::Test, config.strict)?;
    let mut outputs: Vec<(String, String)> = Vec::with_capacity(test_records.len());
    for record in &test_records {
        let set = load_candidates(&record.id, &fingerprint, &config.cache_dir)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .ok_or_else(|| {
                missing_upstream(
                    "candidate cache entry",
                    &cache_path(&config.cache_dir, &record.id, &fingerprint),
                    "conversum generate",
                )
            })?;
        let pick = match &scorer {
            None => {
                // Generator order: the first beam is the backend's own
                // top candidate.
                set.candidates
                    .first()
                    .ok_or_else(|| {
                        CliError::Runtime(format!("empty candidate set for {}", record.id))
                    })?
                    .text
                    .clone()
            }
            Some(scorer) => {
                let doc_emb = encode(&record.text, encoder.as_ref())
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", record.id)))?;
                let ref_emb = encode(&record.summary, encoder.as_ref())
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", record.id)))?;
                let context = ScoringContext {
                    document_embedding: &doc_emb,
                    reference_embedding: &ref_emb,
                    reference_tokens: token_count(&record.summary),
                    target_lang: &record.target_lang,
                };
                let mut best: Option<(f64, &str)> = None;
                for candidate in &set.candidates {
                    let features = candidate_features(
                        &candidate.text,
                        &context,
                        encoder.as_ref(),
                        lang_id.as_ref(),
                    )
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", record.id)))?;
                    let score = scorer.score(&features);
                    if best.map(|(b, _)| score > b).unwrap_or(true) {
                        best = Some((score, &candidate.text));
                    }
                }
                best.expect("candidate sets are non-empty").1.to_string()
            }
        };
        outputs.push((record.id.clone(), pick));
    }

    let system_name = if baseline {
        format!("{}-baseline", config.system_name)
    } else {
        config.system_name.clone()
    };
    let backends = EvalBackends {
        encoder: encoder.as_ref(),
        token_encoder: token_encoder.as_ref(),
        lang_id: lang_id.as_ref(),
    };
    let report = evaluate_system(
        &outputs,
        &test_records,
        &backends,
        &system_name,
        config.snapshot(),
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let eval_dir = config.output_dir.join(if baseline {
        "evaluate-baseline"
    } else {
        "evaluate"
    });
    std::fs::create_dir_all(&eval_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", eval_dir.display())))?;
    let pair_order = config.report_pair_order();
    let csv_path = eval_dir.join("report.csv");
    std::fs::write(
        &csv_path,
        emit_report(&report, ReportFormat::Csv, pair_order.as_deref()),
    )
    .map_err(|e| CliError::Runtime(format!("write {}: {e}", csv_path.display())))?;
    let md_path = eval_dir.join("report.md");
    std::fs::write(
        &md_path,
        emit_report(&report, ReportFormat::Markdown, pair_order.as_deref()),
    )
    .map_err(|e| CliError::Runtime(format!("write {}: {e}", md_path.display())))?;
    let json_path = eval_dir.join("report.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&report).expect("report serialization"),
    )
    .map_err(|e| CliError::Runtime(format!("write {}: {e}", json_path.display())))?;

    log::info!(
        "evaluated {} documents into {}",
        outputs.len(),
        eval_dir.display()
    );
    manifest.finish(
        &config.output_dir,
        json!({
            "documents": outputs.len(),
            "rows": report.rows.len(),
            "baseline": baseline,
            "system": system_name,
        }),
        &[
            ("report_csv", csv_path),
            ("report_md", md_path),
            ("report_json", json_path),
        ],
    )?;
    Ok(())
}
