//! Pipeline configuration: one canonical JSON document, with CLI flags
//! overriding file values. The merged effective config is what manifests
//! record, so a run can be reproduced from its manifest alone.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use conversum_core::corpus::{LanguageTag, ValidationOptions};
use conversum_core::generation::{GenerationConfig, GeneratorBackend, StubGenerator};
use conversum_core::llm_baseline::{PromptMode, ProviderConfig, RetryPolicy, ShotExample};
use conversum_core::scoring::{
    ConstLangId, Encoder, LanguageIdentifier, StubEncoder, StubTokenEncoder, TagPrefixLangId,
    TokenEncoder,
};
use conversum_core::training::TrainConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Monolingual,
    #[default]
    CrossLingual,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub kind: DatasetKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendSection {
    #[serde(default = "default_stub")]
    pub encoder: String,
    #[serde(default = "default_stub")]
    pub generator: String,
    #[serde(default = "default_tag_prefix")]
    pub lang_id: String,
}

fn default_stub() -> String {
    "stub".to_string()
}

fn default_tag_prefix() -> String {
    "tag-prefix".to_string()
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            encoder: default_stub(),
            generator: default_stub(),
            lang_id: default_tag_prefix(),
        }
    }
}

/// LLM comparison settings (`compare-llm` only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmSection {
    pub provider: ProviderConfig,
    #[serde(default)]
    pub policy: RetryPolicy,
    /// (source_lang, target_lang) pairs drawn from the test split.
    pub pairs: Vec<(String, String)>,
    #[serde(default = "default_mode")]
    pub mode: PromptMode,
    #[serde(default)]
    pub shot_examples: HashMap<String, ShotExample>,
    #[serde(default)]
    pub max_samples_per_pair: Option<usize>,
    /// "api" calls the configured provider; "echo" answers every prompt
    /// with the reference summary (offline dry run).
    #[serde(default = "default_client")]
    pub client: String,
}

fn default_mode() -> PromptMode {
    PromptMode::ZeroShot
}

fn default_client() -> String {
    "api".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default = "default_generation_batch")]
    pub generation_batch_size: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub backends: BackendSection,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_system_name")]
    pub system_name: String,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub pair_order: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub llm: Option<LlmSection>,
}

fn default_generation_batch() -> usize {
    2
}

fn default_system_name() -> String {
    "conversum".to_string()
}

fn default_workers() -> usize {
    1
}

/// Flag overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub strict: bool,
}

impl PipelineConfig {
    /// Load a config file and apply flag overrides. The global seed
    /// propagates into the generation and train sections so one value
    /// controls the whole run.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;

        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(workers) = overrides.workers {
            config.workers = workers;
        }
        if overrides.strict {
            config.strict = true;
        }
        config.generation.seed = config.seed;
        config.train.seed = config.seed;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !self.dataset.dir.is_dir() {
            return Err(CliError::Usage(format!(
                "dataset directory not found: {}",
                self.dataset.dir.display()
            )));
        }
        if self.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".to_string()));
        }
        if self.generation_batch_size == 0 {
            return Err(CliError::Usage(
                "generation_batch_size must be at least 1".to_string(),
            ));
        }
        self.generation
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for (source, target) in self.pair_order.iter().flatten() {
            LanguageTag::parse(source)
                .and(LanguageTag::parse(target))
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }

    pub fn validation_options(&self) -> ValidationOptions {
        ValidationOptions {
            monolingual: self.dataset.kind == DatasetKind::Monolingual,
        }
    }

    /// Canonical (key-sorted) JSON snapshot of the effective config.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialization")
    }

    pub fn build_encoder(&self) -> Result<Box<dyn Encoder>, CliError> {
        match self.backends.encoder.as_str() {
            "stub" => Ok(Box::new(StubEncoder::new())),
            other => Err(CliError::Usage(format!(
                "unknown encoder backend \"{other}\""
            ))),
        }
    }

    pub fn build_token_encoder(&self) -> Result<Box<dyn TokenEncoder>, CliError> {
        match self.backends.encoder.as_str() {
            "stub" => Ok(Box::new(StubTokenEncoder::new())),
            other => Err(CliError::Usage(format!(
                "unknown encoder backend \"{other}\""
            ))),
        }
    }

    pub fn build_generator(&self) -> Result<Box<dyn GeneratorBackend>, CliError> {
        match self.backends.generator.as_str() {
            "stub" => Ok(Box::new(StubGenerator::new())),
            other => Err(CliError::Usage(format!(
                "unknown generator backend \"{other}\""
            ))),
        }
    }

    pub fn build_lang_id(&self) -> Result<Box<dyn LanguageIdentifier>, CliError> {
        let selector = self.backends.lang_id.as_str();
        if selector == "tag-prefix" {
            return Ok(Box::new(TagPrefixLangId));
        }
        if let Some(rest) = selector.strip_prefix("constant:") {
            let p: f64 = rest.parse().map_err(|e| {
                CliError::Usage(format!("bad constant lang-id confidence \"{rest}\": {e}"))
            })?;
            return Ok(Box::new(ConstLangId::new(p)));
        }
        Err(CliError::Usage(format!(
            "unknown lang-id backend \"{selector}\""
        )))
    }

    /// Ordered report pairs, parsed.
    pub fn report_pair_order(&self) -> Option<Vec<(String, String)>> {
        self.pair_order.as_ref().map(|pairs| {
            pairs
                .iter()
                .map(|(s, t)| {
                    (
                        LanguageTag::parse(s).expect("validated").to_string(),
                        LanguageTag::parse(t).expect("validated").to_string(),
                    )
                })
                .collect()
        })
    }
}
