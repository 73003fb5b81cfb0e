//! Prompt construction for the LLM comparison protocol.
//!
//! Prompts are golden-file contracts: byte-stable pure functions of the
//! spec. The zero-shot template asks for a summary in the target language
//! in at most 80 words; one-shot prepends a single worked example; the
//! confidence survey asks for 1-10 self-ratings over the full
//! 45-language registry.

use serde::{Deserialize, Serialize};

use crate::corpus::registry::display_names;
use crate::corpus::LanguageTag;

use super::LlmError;

/// Prompting modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    ZeroShot,
    OneShot,
    ConfidenceSurvey,
}

/// The worked example prepended in one-shot mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotExample {
    pub document: String,
    pub summary: String,
}

/// A fully specified prompt request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub mode: PromptMode,
    pub target_lang: LanguageTag,
    pub shot_example: Option<ShotExample>,
    pub document: String,
}

impl PromptSpec {
    pub fn zero_shot(target_lang: LanguageTag, document: &str) -> Self {
        PromptSpec {
            mode: PromptMode::ZeroShot,
            target_lang,
            shot_example: None,
            document: document.to_string(),
        }
    }

    pub fn one_shot(target_lang: LanguageTag, document: &str, example: ShotExample) -> Self {
        PromptSpec {
            mode: PromptMode::OneShot,
            target_lang,
            shot_example: Some(example),
            document: document.to_string(),
        }
    }

    pub fn confidence_survey() -> Self {
        PromptSpec {
            mode: PromptMode::ConfidenceSurvey,
            target_lang: LanguageTag::parse("english").expect("registry language"),
            shot_example: None,
            document: String::new(),
        }
    }

    fn validate(&self) -> Result<(), LlmError> {
        match self.mode {
            PromptMode::OneShot if self.shot_example.is_none() => Err(LlmError::SpecInvalid(
                "one_shot mode requires a shot_example".to_string(),
            )),
            PromptMode::ZeroShot | PromptMode::ConfidenceSurvey if self.shot_example.is_some() => {
                Err(LlmError::SpecInvalid(format!(
                    "{:?} mode forbids a shot_example",
                    self.mode
                )))
            }
            _ => Ok(()),
        }
    }
}

fn zero_shot_text(target_lang: &LanguageTag, document: &str) -> String {
    format!(
        "Summarize the given text in {}, preferably in 80 words, concisely and informative. {}",
        target_lang.display_name(),
        document
    )
}

/// The confidence-survey prompt with the 45-language list in registry
/// order.
pub fn confidence_survey_prompt() -> String {
    format!(
        "How confident are you to generate high-quality cross-lingual summary concisely and \
         informatively for low-resource languages? Find the list of languages - {}. Rate your \
         confidence level for cross-lingual summarization on a scale of 1 to 10 for the given \
         languages.",
        display_names().join(", ")
    )
}

/// Render a prompt. Pure: equal specs produce byte-equal prompts.
pub fn build_prompt(spec: &PromptSpec) -> Result<String, LlmError> {
    spec.validate()?;
    Ok(match spec.mode {
        PromptMode::ZeroShot => zero_shot_text(&spec.target_lang, &spec.document),
        PromptMode::OneShot => {
            let example = spec
                .shot_example
                .as_ref()
                .expect("validated one_shot has an example");
            format!(
                "Example:\nDocument: {}\nSummary ({}): {}\n\n{}",
                example.document,
                spec.target_lang.display_name(),
                example.summary,
                zero_shot_text(&spec.target_lang, &spec.document)
            )
        }
        PromptMode::ConfidenceSurvey => confidence_survey_prompt(),
    })
}
