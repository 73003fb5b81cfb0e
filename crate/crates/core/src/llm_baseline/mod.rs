//! Programmatic LLM comparison harness: exact prompts, a chat-completion
//! client with retries and rate limiting, and per-pair evaluation of the
//! collected summaries.

pub mod client;
pub mod policy;
pub mod prompts;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, LanguageTag, Split};
use crate::evaluation::{
    score_sample, EvalBackends, EvalError, EvalReport, ReportRow, SampleScores,
};

pub use client::{
    ChatClient, ChatMessage, ChatOutcome, ChatRequest, ClientError, HttpChatClient, ProviderConfig,
    API_KEY_ENV,
};
pub use policy::{RequestGate, RetryPolicy};
pub use prompts::{build_prompt, confidence_survey_prompt, PromptMode, PromptSpec, ShotExample};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid prompt spec: {0}")]
    SpecInvalid(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts: {detail}")]
    RateLimited { attempts: usize, detail: String },
    #[error("context overflow: {0}")]
    ContextOverflow(String),
    #[error("transient errors exhausted {attempts} attempts: {detail}")]
    TransientExhausted { attempts: usize, detail: String },
    #[error("provider error: {0}")]
    Provider(String),
    #[error("provider returned an empty summary")]
    EmptyResponse,
    #[error("transcript io error on {path}: {detail}")]
    TranscriptIo {
        path: std::path::PathBuf,
        detail: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// One provider response with the extracted summary and bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub raw_text: String,
    pub extracted_summary: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub retries: usize,
}

/// Label-stripping rules for response extraction: a single optional
/// leading `<label>:` is removed, per configured language-label table.
#[derive(Debug, Clone)]
pub struct ExtractionRules {
    pattern: Regex,
}

impl Default for ExtractionRules {
    fn default() -> Self {
        ExtractionRules::new(&["Summary", "সারাংশ"]).expect("default labels are a valid pattern")
    }
}

impl ExtractionRules {
    pub fn new(labels: &[&str]) -> Result<Self, LlmError> {
        let alternatives = labels
            .iter()
            .map(|l| regex::escape(l))
            .collect::<Vec<_>>()
            .join("|");
        let pattern = Regex::new(&format!(r"^\s*(?:{alternatives})\s*:\s*"))
            .map_err(|e| LlmError::SpecInvalid(format!("bad label table: {e}")))?;
        Ok(ExtractionRules { pattern })
    }

    /// Strip one leading label, then trim.
    pub fn extract(&self, raw: &str) -> String {
        self.pattern.replace(raw.trim(), "").trim().to_string()
    }
}

fn classify_exhausted(error: ClientError, attempts: usize) -> LlmError {
    match error {
        ClientError::Auth(detail) => LlmError::Auth(detail),
        ClientError::ContextOverflow(detail) => LlmError::ContextOverflow(detail),
        ClientError::RateLimited(detail) => LlmError::RateLimited { attempts, detail },
        ClientError::Transient(detail) => LlmError::TransientExhausted { attempts, detail },
        ClientError::Other(detail) => LlmError::Provider(detail),
    }
}

/// Issue one request through the gate, retrying transient failures with
/// exponential backoff up to `policy.max_retries`.
pub fn request_summary_gated(
    client: &dyn ChatClient,
    model: &str,
    prompt: &str,
    policy: &RetryPolicy,
    gate: &RequestGate,
    rules: &ExtractionRules,
) -> Result<LlmResponse, LlmError> {
    let request = ChatRequest {
        model: model.to_string(),
        messages: vec![ChatMessage::user(prompt)],
    };
    let started = Instant::now();
    let mut retries = 0;
    loop {
        let outcome = {
            let _slot = gate.acquire();
            client.complete(&request)
        };
        match outcome {
            Ok(outcome) => {
                let extracted = rules.extract(&outcome.content);
                if extracted.is_empty() {
                    return Err(LlmError::EmptyResponse);
                }
                return Ok(LlmResponse {
                    raw_text: outcome.content,
                    extracted_summary: extracted,
                    model_id: outcome.model_id,
                    latency_ms: started.elapsed().as_millis() as u64,
                    prompt_tokens: outcome.prompt_tokens,
                    completion_tokens: outcome.completion_tokens,
                    retries,
                });
            }
            Err(error) if error.is_retryable() && retries < policy.max_retries => {
                log::warn!("retrying after provider error: {error}");
                std::thread::sleep(policy.backoff_delay(retries));
                retries += 1;
            }
            Err(error) => return Err(classify_exhausted(error, retries + 1)),
        }
    }
}

/// [`request_summary_gated`] with a one-off gate built from the policy.
pub fn request_summary(
    client: &dyn ChatClient,
    model: &str,
    prompt: &str,
    policy: &RetryPolicy,
) -> Result<LlmResponse, LlmError> {
    let gate = RequestGate::new(policy);
    request_summary_gated(
        client,
        model,
        prompt,
        policy,
        &gate,
        &ExtractionRules::default(),
    )
}

/// Audit record for one request/response exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub document_id: String,
    pub prompt: String,
    pub raw_text: String,
    pub model_id: String,
    pub latency_ms: u64,
}

/// Persist transcripts as JSONL for audit.
pub fn write_transcripts(records: &[TranscriptRecord], path: &Path) -> Result<(), LlmError> {
    let mut file = std::fs::File::create(path).map_err(|e| LlmError::TranscriptIo {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    for record in records {
        let line = serde_json::to_string(record).expect("transcript serialization");
        writeln!(file, "{line}").map_err(|e| LlmError::TranscriptIo {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
    }
    Ok(())
}

/// Settings for one comparison run.
#[derive(Debug, Clone)]
pub struct ComparisonSpec {
    pub pairs: Vec<(LanguageTag, LanguageTag)>,
    pub mode: PromptMode,
    /// One-shot example per (source, target) pair, keyed by canonical
    /// tag strings. Required for every pair in one-shot mode.
    pub shot_examples: HashMap<(String, String), ShotExample>,
    pub model: String,
    pub policy: RetryPolicy,
    pub system_name: String,
    /// Cap samples per pair; the upstream sample counts are whatever the
    /// corpus view yields when unset.
    pub max_samples_per_pair: Option<usize>,
}

/// Outcome of a comparison run: the aggregated report plus per-sample
/// transcripts and failures (document id, error string).
#[derive(Debug)]
pub struct ComparisonOutcome {
    pub report: EvalReport,
    pub transcripts: Vec<TranscriptRecord>,
    pub failures: Vec<(String, String)>,
}

/// Run the comparison protocol over the test split: per sample, build the
/// prompt, request a summary, and score it against the reference. Failed
/// samples are logged and excluded; aggregation is key-joined by document
/// id, so completion order never affects the report.
pub fn run_comparison(
    spec: &ComparisonSpec,
    dataset: &Dataset,
    client: &dyn ChatClient,
    backends: &EvalBackends<'_>,
) -> Result<ComparisonOutcome, LlmError> {
    let mut records = Vec::new();
    for (source, target) in &spec.pairs {
        let mut view = dataset.language_pair_view(Split::Test, source, target)?;
        if let Some(cap) = spec.max_samples_per_pair {
            view.truncate(cap);
        }
        records.extend(view);
    }

    // Build all prompts up front; prompt construction errors are fatal
    // (they are spec errors, not per-sample provider failures).
    let mut prompts = Vec::with_capacity(records.len());
    for record in &records {
        let prompt_spec = match spec.mode {
            PromptMode::ZeroShot => PromptSpec::zero_shot(record.target_lang.clone(), &record.text),
            PromptMode::OneShot => {
                let key = (
                    record.source_lang.to_string(),
                    record.target_lang.to_string(),
                );
                let example = spec.shot_examples.get(&key).cloned().ok_or_else(|| {
                    LlmError::SpecInvalid(format!(
                        "one_shot mode needs a shot example for pair {}-{}",
                        key.0, key.1
                    ))
                })?;
                PromptSpec::one_shot(record.target_lang.clone(), &record.text, example)
            }
            PromptMode::ConfidenceSurvey => {
                return Err(LlmError::SpecInvalid(
                    "confidence_survey is not a per-document comparison mode".to_string(),
                ))
            }
        };
        prompts.push(build_prompt(&prompt_spec)?);
    }

    type SampleResult = (usize, Result<(LlmResponse, SampleScores), String>);
    let gate = RequestGate::new(&spec.policy);
    let rules = ExtractionRules::default();
    let queue: Mutex<VecDeque<usize>> = Mutex::new((0..records.len()).collect());
    let results: Mutex<Vec<SampleResult>> = Mutex::new(Vec::new());

    let workers = spec.policy.max_concurrent.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = match queue.lock().expect("queue poisoned").pop_front() {
                    Some(index) => index,
                    None => break,
                };
                let record = &records[index];
                let outcome = request_summary_gated(
                    client,
                    &spec.model,
                    &prompts[index],
                    &spec.policy,
                    &gate,
                    &rules,
                )
                .map_err(|e| e.to_string())
                .and_then(|response| {
                    score_sample(&response.extracted_summary, record, backends)
                        .map(|scores| (response, scores))
                        .map_err(|e| e.to_string())
                });
                results
                    .lock()
                    .expect("results poisoned")
                    .push((index, outcome));
            });
        }
    });

    let mut results = results.into_inner().expect("results poisoned");
    results.sort_by_key(|(index, _)| *index);

    let mut transcripts = Vec::new();
    let mut failures = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<SampleScores>> = BTreeMap::new();

    for (document_index, outcome) in results {
        let record = &records[document_index];
        match outcome {
            Ok((response, scores)) => {
                transcripts.push(TranscriptRecord {
                    document_id: record.id.clone(),
                    prompt: prompts[document_index].clone(),
                    raw_text: response.raw_text.clone(),
                    model_id: response.model_id.clone(),
                    latency_ms: response.latency_ms,
                });
                groups
                    .entry((
                        record.source_lang.to_string(),
                        record.target_lang.to_string(),
                    ))
                    .or_default()
                    .push(scores);
            }
            Err(detail) => {
                log::warn!("sample {} failed: {detail}", record.id);
                failures.push((record.id.clone(), detail));
            }
        }
    }

    let rows: Vec<ReportRow> = groups
        .into_iter()
        .map(|((source, target), scores)| {
            let n = scores.len();
            ReportRow {
                source_lang: LanguageTag::parse(&source).expect("validated tag"),
                target_lang: LanguageTag::parse(&target).expect("validated tag"),
                sample_count: n,
                mean_lase: scores.iter().map(|s| s.lase).sum::<f64>() / n as f64,
                mean_bertscore: scores.iter().map(|s| s.bertscore_f1).sum::<f64>() / n as f64,
            }
        })
        .collect();

    let config_snapshot = serde_json::json!({
        "model": spec.model,
        "mode": spec.mode,
        "policy": spec.policy,
        "failed_samples": failures.len(),
    });
    let report = EvalReport::new(&spec.system_name, rows, config_snapshot)?;
    Ok(ComparisonOutcome {
        report,
        transcripts,
        failures,
    })
}

/// Ask the provider to self-rate cross-lingual confidence `repeats`
/// times; every raw response is returned unaggregated.
pub fn run_confidence_survey(
    client: &dyn ChatClient,
    model: &str,
    policy: &RetryPolicy,
    repeats: usize,
) -> Result<Vec<LlmResponse>, LlmError> {
    let prompt = build_prompt(&PromptSpec::confidence_survey())?;
    let gate = RequestGate::new(policy);
    let rules = ExtractionRules::default();
    (0..repeats)
        .map(|_| request_summary_gated(client, model, &prompt, policy, &gate, &rules))
        .collect()
}
