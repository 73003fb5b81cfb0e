//! `generate`: populate the candidate cache for every record of every
//! split. Idempotent: cached entries are skipped on re-run.

use rayon::prelude::*;
use serde_json::json;

use conversum_core::corpus::Split;
use conversum_core::generation::{cache_candidates, generate_candidates, load_candidates};

use crate::commands::{load_split_records, open_dataset};
use crate::config::PipelineConfig;
use crate::manifest::ManifestWriter;
use crate::CliError;

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let manifest = ManifestWriter::start("generate", config.snapshot());
    let dataset = open_dataset(config)?;
    let generator = config.build_generator()?;
    let fingerprint = config.generation.fingerprint();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut generated = 0usize;
    let mut cache_hits = 0usize;
    let mut failed = 0usize;
    let mut skipped_records = 0usize;

    for split in Split::ALL {
        let (records, skipped) = load_split_records(&dataset, split, config.strict)?;
        skipped_records += skipped;

        // Batch only to bound memory; candidate sets are written as they
        // complete and a re-run sees them as cache hits.
        let results: Vec<Result<bool, String>> = pool.install(|| {
            records
                .par_chunks(config.generation_batch_size.max(1))
                .flat_map_iter(|chunk| {
                    chunk.iter().map(|record| {
                        match load_candidates(&record.id, &fingerprint, &config.cache_dir) {
                            Ok(Some(_)) => {
                                log::info!("cache hit for {}", record.id);
                                return Ok(false);
                            }
                            Ok(None) => {}
                            Err(e) => return Err(e.to_string()),
                        }
                        let set =
                            generate_candidates(record, &config.generation, generator.as_ref())
                                .map_err(|e| format!("{}: {e}", record.id))?;
                        cache_candidates(&set, &config.cache_dir).map_err(|e| e.to_string())?;
                        Ok(true)
                    })
                })
                .collect()
        });

        for result in results {
            match result {
                Ok(true) => generated += 1,
                Ok(false) => cache_hits += 1,
                Err(detail) => {
                    if config.strict {
                        return Err(CliError::Runtime(detail));
                    }
                    log::warn!("generation failed: {detail}");
                    failed += 1;
                }
            }
        }
    }

    log::info!("generated {generated}, cache hits {cache_hits}, failed {failed}");
    manifest.finish(
        &config.output_dir,
        json!({
            "generated": generated,
            "cache_hits": cache_hits,
            "failed": failed,
            "skipped_records": skipped_records,
            "fingerprint": fingerprint,
        }),
        &[("cache_dir", config.cache_dir.clone())],
    )?;
    Ok(())
}
