//! `compare-llm`: run the LLM comparison protocol over the configured
//! language pairs and emit its report; when an `evaluate` report already
//! exists, also render the side-by-side comparison table.

use std::collections::HashMap;

use serde_json::json;

use conversum_core::corpus::{collect_lenient, LanguageTag, Split};
use conversum_core::evaluation::{
    emit_comparison_markdown, emit_report, parse_csv_report, EvalBackends, ReportFormat,
};
use conversum_core::llm_baseline::{
    run_comparison, write_transcripts, ChatClient, ChatOutcome, ChatRequest, ClientError,
    ComparisonSpec, HttpChatClient, PromptMode,
};

use crate::commands::open_dataset;
use crate::config::{LlmSection, PipelineConfig};
use crate::manifest::ManifestWriter;
use crate::CliError;

/// Offline dry-run client: answers every prompt with the reference
/// summary of the test document embedded in it.
struct EchoClient {
    by_document_text: Vec<(String, String)>,
}

impl ChatClient for EchoClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatOutcome, ClientError> {
        let prompt = &request.messages[0].content;
        self.by_document_text
            .iter()
            .find(|(text, _)| prompt.contains(text.as_str()))
            .map(|(_, summary)| ChatOutcome {
                content: summary.clone(),
                model_id: "echo".to_string(),
                prompt_tokens: 0,
                completion_tokens: 0,
            })
            .ok_or_else(|| ClientError::Other("prompt matches no test document".to_string()))
    }
}

fn parse_pairs(section: &LlmSection) -> Result<Vec<(LanguageTag, LanguageTag)>, CliError> {
    section
        .pairs
        .iter()
        .map(|(s, t)| {
            Ok((
                LanguageTag::parse(s).map_err(|e| CliError::Usage(e.to_string()))?,
                LanguageTag::parse(t).map_err(|e| CliError::Usage(e.to_string()))?,
            ))
        })
        .collect()
}

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let manifest = ManifestWriter::start("compare_llm", config.snapshot());
    let section = config
        .llm
        .as_ref()
        .ok_or_else(|| CliError::Usage("config has no \"llm\" section".to_string()))?;
    let dataset = open_dataset(config)?;
    let encoder = config.build_encoder()?;
    let token_encoder = config.build_token_encoder()?;
    let lang_id = config.build_lang_id()?;

    let pairs = parse_pairs(section)?;
    let shot_examples: HashMap<(String, String), _> = section
        .shot_examples
        .iter()
        .filter_map(|(key, example)| {
            // Keys are "source-target" canonical tag pairs.
            key.split_once('-')
                .map(|(s, t)| ((s.to_string(), t.to_string()), example.clone()))
        })
        .collect();

    let spec = ComparisonSpec {
        pairs,
        mode: section.mode,
        shot_examples,
        model: section.provider.model.clone(),
        policy: section.policy.clone(),
        system_name: section.provider.model.clone(),
        max_samples_per_pair: section.max_samples_per_pair,
    };

    let client: Box<dyn ChatClient> = match section.client.as_str() {
        "api" => Box::new(
            HttpChatClient::from_env(section.provider.clone())
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        "echo" => {
            let (records, _) = collect_lenient(
                dataset
                    .load_split(Split::Test)
                    .map_err(|e| CliError::Runtime(e.to_string()))?,
            );
            Box::new(EchoClient {
                by_document_text: records.into_iter().map(|r| (r.text, r.summary)).collect(),
            })
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown llm client \"{other}\" (expected \"api\" or \"echo\")"
            )))
        }
    };

    if section.mode == PromptMode::ConfidenceSurvey {
        return Err(CliError::Usage(
            "confidence_survey is a standalone probe, not a comparison mode".to_string(),
        ));
    }

    let backends = EvalBackends {
        encoder: encoder.as_ref(),
        token_encoder: token_encoder.as_ref(),
        lang_id: lang_id.as_ref(),
    };
    let outcome = run_comparison(&spec, &dataset, client.as_ref(), &backends)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let llm_dir = config.output_dir.join("llm");
    std::fs::create_dir_all(&llm_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", llm_dir.display())))?;
    let pair_order = config.report_pair_order();

    let csv_path = llm_dir.join("report.csv");
    std::fs::write(
        &csv_path,
        emit_report(&outcome.report, ReportFormat::Csv, pair_order.as_deref()),
    )
    .map_err(|e| CliError::Runtime(format!("write {}: {e}", csv_path.display())))?;
    let md_path = llm_dir.join("report.md");
    std::fs::write(
        &md_path,
        emit_report(
            &outcome.report,
            ReportFormat::Markdown,
            pair_order.as_deref(),
        ),
    )
    .map_err(|e| CliError::Runtime(format!("write {}: {e}", md_path.display())))?;
    let transcripts_path = llm_dir.join("transcripts.jsonl");
    write_transcripts(&outcome.transcripts, &transcripts_path)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    // Side-by-side table when the system report exists and covers the
    // same pairs.
    let mut comparison_path = None;
    let eval_csv = config.output_dir.join("evaluate").join("report.csv");
    if eval_csv.is_file() {
        let bytes = std::fs::read(&eval_csv)
            .map_err(|e| CliError::Runtime(format!("read {}: {e}", eval_csv.display())))?;
        match parse_csv_report(&bytes) {
            Ok(system_report) => {
                match emit_comparison_markdown(
                    &outcome.report,
                    &system_report,
                    pair_order.as_deref(),
                ) {
                    Ok(markdown) => {
                        let path = llm_dir.join("comparison.md");
                        std::fs::write(&path, markdown).map_err(|e| {
                            CliError::Runtime(format!("write {}: {e}", path.display()))
                        })?;
                        comparison_path = Some(path);
                    }
                    Err(e) => log::warn!("skipping side-by-side table: {e}"),
                }
            }
            Err(e) => log::warn!("cannot parse {}: {e}", eval_csv.display()),
        }
    }

    log::info!(
        "compared {} samples ({} failures) into {}",
        outcome.transcripts.len(),
        outcome.failures.len(),
        llm_dir.display()
    );
    let mut artifacts = vec![
        ("report_csv", csv_path),
        ("report_md", md_path),
        ("transcripts", transcripts_path),
    ];
    if let Some(path) = comparison_path {
        artifacts.push(("comparison_md", path));
    }
    manifest.finish(
        &config.output_dir,
        json!({
            "samples": outcome.transcripts.len(),
            "failures": outcome.failures.len(),
            "failed_ids": outcome.failures.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>(),
            "rows": outcome.report.rows.len(),
        }),
        &artifacts,
    )?;
    Ok(())
}
