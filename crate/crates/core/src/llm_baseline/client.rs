//! Chat-completion provider abstraction and the OpenAI-compatible HTTP
//! implementation.
//!
//! The interface has one required method (messages in, message out) so
//! mocks and alternate providers are drop-in.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "CONVERSUM_LLM_API_KEY";

/// Provider-level failures, classified for retry handling.
#[derive(Debug, Error)]
pub enum ClientError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("input exceeds the provider's context window: {0}")]
    ContextOverflow(String),
    #[error("transient provider error: {0}")]
    Transient(String),
    #[error("provider error: {0}")]
    Other(String),
}

impl ClientError {
    /// Retryable errors: transient faults and rate limiting.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            ClientError::Transient(_) | ClientError::RateLimited(_)
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: &str) -> Self {
        ChatMessage {
            role: "user".to_string(),
            content: content.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

/// One completed chat turn.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatOutcome {
    pub content: String,
    pub model_id: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Chat-completion provider: messages in, message out.
pub trait ChatClient: Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatOutcome, ClientError>;
}

/// Connection settings for an OpenAI-compatible endpoint. The API key is
/// read from [`API_KEY_ENV`], never from the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    120
}

/// Blocking HTTP client for `{base_url}/chat/completions`.
pub struct HttpChatClient {
    config: ProviderConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn from_env(config: ProviderConfig) -> Result<Self, ClientError> {
        let api_key = std::env::var(API_KEY_ENV)
            .map_err(|_| ClientError::Auth(format!("{API_KEY_ENV} is not set")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Other(e.to_string()))?;
        Ok(HttpChatClient {
            config,
            api_key,
            http,
        })
    }
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    #[serde(default)]
    model: Option<String>,
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    content: String,
}

#[derive(Debug, Default, Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatOutcome, ClientError> {
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let response = self
            .http
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(request)
            .send()
            .map_err(|e| ClientError::Transient(e.to_string()))?;

        let status = response.status();
        let body = response
            .text()
            .map_err(|e| ClientError::Transient(e.to_string()))?;

        if !status.is_success() {
            let lowered = body.to_ascii_lowercase();
            return Err(match status.as_u16() {
                401 | 403 => ClientError::Auth(body),
                429 => ClientError::RateLimited(body),
                400 if lowered.contains("context") && lowered.contains("length")
                    || lowered.contains("maximum context")
                    || lowered.contains("context_length_exceeded") =>
                {
                    ClientError::ContextOverflow(body)
                }
                code if code >= 500 => ClientError::Transient(body),
                _ => ClientError::Other(format!("{status}: {body}")),
            });
        }

        let parsed: CompletionResponse = serde_json::from_str(&body)
            .map_err(|e| ClientError::Other(format!("malformed response: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ClientError::Other("response has no choices".to_string()))?;
        let usage = parsed.usage.unwrap_or_default();
        Ok(ChatOutcome {
            content: choice.message.content,
            model_id: parsed.model.unwrap_or_else(|| self.config.model.clone()),
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retryable_classification() {
        assert!(ClientError::Transient("x".into()).is_retryable());
        assert!(ClientError::RateLimited("x".into()).is_retryable());
        assert!(!ClientError::Auth("x".into()).is_retryable());
        assert!(!ClientError::ContextOverflow("x".into()).is_retryable());
    }

    #[test]
    fn completion_response_parses() {
        let body = r#"{
            "model": "gpt-4o-2024-05-13",
            "choices": [{"message": {"role": "assistant", "content": "Summary: hi"}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 3}
        }"#;
        let parsed: CompletionResponse = serde_json::from_str(body).unwrap();
        assert_eq!(parsed.choices[0].message.content, "Summary: hi");
        assert_eq!(parsed.usage.unwrap().prompt_tokens, 10);
    }
}
