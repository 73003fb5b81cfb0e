//! Subcommand implementations.

pub mod compare_llm;
pub mod evaluate;
pub mod generate;
pub mod score;
pub mod train;

use std::path::PathBuf;

use conversum_core::corpus::{collect_lenient, collect_strict, Dataset, DocumentRecord, Split};

use crate::config::PipelineConfig;
use crate::CliError;

/// Open the configured dataset, checking every split file exists.
pub fn open_dataset(config: &PipelineConfig) -> Result<Dataset, CliError> {
    let dataset = Dataset::open_with_options(&config.dataset.dir, config.validation_options())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for split in Split::ALL {
        let path = dataset.split_path(split);
        if !path.is_file() {
            return Err(CliError::Usage(format!(
                "missing split file {}",
                path.display()
            )));
        }
    }
    Ok(dataset)
}

/// Load one split honoring strict mode. Lenient runs skip invalid
/// records (logged and counted); strict runs abort on the first.
pub fn load_split_records(
    dataset: &Dataset,
    split: Split,
    strict: bool,
) -> Result<(Vec<DocumentRecord>, usize), CliError> {
    let stream = dataset
        .load_split(split)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    if strict {
        let records = collect_strict(stream).map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok((records, 0))
    } else {
        Ok(collect_lenient(stream))
    }
}

/// The artifact path a downstream command expects; used in
/// missing-upstream messages.
pub fn scores_path(config: &PipelineConfig, split: Split) -> PathBuf {
    config.output_dir.join("scores").join(split.file_name())
}

pub fn missing_upstream(what: &str, expected: &std::path::Path, produce_with: &str) -> CliError {
    CliError::Runtime(format!(
        "missing upstream artifact: {what} not found at {}; run `{produce_with}` first",
        expected.display()
    ))
}
