//! `train`: fit the linear scorer on the scored dumps under the
//! contrastive ranking loss, validating periodically and checkpointing.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde_json::json;

use conversum_core::corpus::{DocumentRecord, Split};
use conversum_core::generation::CandidateSummary;
use conversum_core::scoring::{ScoredCandidate, ScoredDumpRecord};
use conversum_core::training::{feature_dim, train, LinearScorer, RankedDocument};

use crate::commands::{load_split_records, missing_upstream, open_dataset, scores_path};
use crate::config::PipelineConfig;
use crate::manifest::ManifestWriter;
use crate::CliError;

/// Rebuild ranked documents from a scored dump joined with the corpus.
/// Dumps carry candidates in rank order; group index is not persisted in
/// the dump format, so it is rebuilt as the rank position (the trainer
/// never reads it).
fn load_ranked_documents(
    config: &PipelineConfig,
    records: &[DocumentRecord],
    split: Split,
) -> Result<Vec<RankedDocument>, CliError> {
    let path = scores_path(config, split);
    if !path.is_file() {
        return Err(missing_upstream("scored dump", &path, "conversum score"));
    }
    let file = std::fs::File::open(&path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;

    let mut by_id: BTreeMap<String, Vec<ScoredDumpRecord>> = BTreeMap::new();
    for (line_no, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Runtime(format!("read {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoredDumpRecord = serde_json::from_str(&line).map_err(|e| {
            CliError::Runtime(format!("{} line {}: {e}", path.display(), line_no + 1))
        })?;
        by_id
            .entry(record.document_id.clone())
            .or_default()
            .push(record);
    }

    let corpus: BTreeMap<&str, &DocumentRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut ranked = Vec::with_capacity(by_id.len());
    for (document_id, mut dumps) in by_id {
        let Some(record) = corpus.get(document_id.as_str()) else {
            log::warn!("scored dump references unknown document {document_id}; skipping");
            continue;
        };
        dumps.sort_by_key(|d| d.rank);
        let candidates = dumps
            .into_iter()
            .map(|dump| ScoredCandidate {
                candidate: CandidateSummary {
                    text: dump.candidate_text,
                    language: dump.language,
                    group_index: dump.rank.saturating_sub(1),
                    backend_score: None,
                },
                lase: dump.lase,
                tri_similarity: dump.tri_similarity,
                rank: dump.rank,
            })
            .collect();
        ranked.push(RankedDocument {
            document_id,
            document: record.text.clone(),
            reference: record.summary.clone(),
            target_lang: record.target_lang.clone(),
            candidates,
        });
    }
    Ok(ranked)
}

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let manifest = ManifestWriter::start("train", config.snapshot());
    let dataset = open_dataset(config)?;
    let encoder = config.build_encoder()?;

    let (train_records, _) = load_split_records(&dataset, Split::Train, config.strict)?;
    let (val_records, _) = load_split_records(&dataset, Split::Validation, config.strict)?;
    let train_docs = load_ranked_documents(config, &train_records, Split::Train)?;
    let val_docs = load_ranked_documents(config, &val_records, Split::Validation)?;

    let lang_id = config.build_lang_id()?;
    let run_dir = config.output_dir.join("train");
    let mut scorer = LinearScorer::random_init(feature_dim(encoder.as_ref()), config.seed);
    let history = train(
        &mut scorer,
        &train_docs,
        &val_docs,
        &config.train,
        encoder.as_ref(),
        lang_id.as_ref(),
        Some(&run_dir),
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let final_loss = history.steps.last().map(|(_, loss)| *loss).unwrap_or(0.0);
    let best_val = history
        .validations
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    log::info!(
        "trained {} steps; best checkpoint {}; best validation LaSE {best_val:.4}",
        history.steps.len(),
        history.best_checkpoint
    );

    manifest.finish(
        &config.output_dir,
        json!({
            "steps": history.steps.len(),
            "validations": history.validations.len(),
            "best_checkpoint": history.best_checkpoint,
            "final_train_loss": final_loss,
            "train_documents": train_docs.len(),
            "validation_documents": val_docs.len(),
        }),
        &[("run_dir", run_dir)],
    )?;
    Ok(())
}
