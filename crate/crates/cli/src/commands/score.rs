//! `score`: rank every cached candidate set with LaSE and dump scored
//! candidates per split as JSONL, sorted by document id then rank.

use std::io::Write as _;

use rayon::prelude::*;
use serde_json::json;

use conversum_core::corpus::Split;
use conversum_core::generation::{cache_path, load_candidates};
use conversum_core::scoring::{rank_candidates, ScoredDumpRecord};

use crate::commands::{load_split_records, missing_upstream, open_dataset, scores_path};
use crate::config::PipelineConfig;
use crate::manifest::ManifestWriter;
use crate::CliError;

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let manifest = ManifestWriter::start("score", config.snapshot());
    let dataset = open_dataset(config)?;
    let encoder = config.build_encoder()?;
    let lang_id = config.build_lang_id()?;
    let fingerprint = config.generation.fingerprint();

    let scores_dir = config.output_dir.join("scores");
    std::fs::create_dir_all(&scores_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", scores_dir.display())))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut documents_scored = 0usize;
    let mut candidates_scored = 0usize;

    for split in Split::ALL {
        let (mut records, _skipped) = load_split_records(&dataset, split, config.strict)?;
        records.sort_by(|a, b| a.id.cmp(&b.id));

        let dumps: Vec<Result<Vec<ScoredDumpRecord>, CliError>> = pool.install(|| {
            records
                .par_iter()
                .map(|record| {
                    let set = load_candidates(&record.id, &fingerprint, &config.cache_dir)
                        .map_err(|e| CliError::Runtime(e.to_string()))?
                        .ok_or_else(|| {
                            missing_upstream(
                                "candidate cache entry",
                                &cache_path(&config.cache_dir, &record.id, &fingerprint),
                                "conversum generate",
                            )
                        })?;
                    let ranked = rank_candidates(
                        &set,
                        &record.text,
                        &record.summary,
                        &record.target_lang,
                        encoder.as_ref(),
                        lang_id.as_ref(),
                    )
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", record.id)))?;
                    Ok(ranked
                        .iter()
                        .map(|scored| ScoredDumpRecord::from_scored(&record.id, scored))
                        .collect())
                })
                .collect()
        });

        let path = scores_path(config, split);
        let mut file = std::fs::File::create(&path)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        for dump in dumps {
            let dump = dump?;
            documents_scored += 1;
            candidates_scored += dump.len();
            for record in dump {
                let line = serde_json::to_string(&record).expect("dump serialization");
                writeln!(file, "{line}")
                    .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
            }
        }
    }

    log::info!("scored {candidates_scored} candidates over {documents_scored} documents");
    manifest.finish(
        &config.output_dir,
        json!({
            "documents_scored": documents_scored,
            "candidates_scored": candidates_scored,
        }),
        &[("scores_dir", scores_dir)],
    )?;
    Ok(())
}
