//! Blocking client for OpenAI-compatible chat-completion endpoints.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::prompt::PromptSpec;

pub const ENV_ENDPOINT: &str = "LFCDA_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "LFCDA_LLM_MODEL";
pub const ENV_KEY: &str = "LFCDA_LLM_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    /// Base URL such as `https://host/v1`; `/chat/completions` is appended
    /// unless already present.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    /// Retries after the first attempt for transient failures.
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff: Duration,
    pub timeout: Duration,
    /// Requests in flight for [`llm_instantiate_all`].
    pub max_in_flight: usize,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        LlmConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            temperature: 0.7,
            max_retries: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
            max_in_flight: 4,
        }
    }

    /// Reads endpoint, model and key from the environment. The key is
    /// optional.
    pub fn from_env() -> Result<Self, LlmError> {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.trim().is_empty());
        let endpoint = var(ENV_ENDPOINT)
            .ok_or_else(|| LlmError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        let model =
            var(ENV_MODEL).ok_or_else(|| LlmError::Config(format!("{ENV_MODEL} is not set")))?;
        let mut cfg = LlmConfig::new(endpoint, model);
        cfg.api_key = var(ENV_KEY);
        Ok(cfg)
    }

    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("LLM configuration: {0}")]
    Config(String),
    #[error("network failure after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("endpoint rejected the credentials (HTTP {status})")]
    Auth { status: u16 },
    #[error("endpoint answered HTTP {status} after {attempts} attempts: {body}")]
    Status {
        status: u16,
        attempts: u32,
        body: String,
    },
    #[error("model output does not match the expected schema: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPair {
    pub text_a: String,
    pub text_b: String,
}

fn build_client(cfg: &LlmConfig) -> Result<Client, LlmError> {
    Client::builder()
        .timeout(cfg.timeout)
        .build()
        .map_err(|e| LlmError::Config(e.to_string()))
}

/// Sends one chat-completion request for `spec` and parses the answer.
///
/// Connection failures, timeouts, HTTP 429 and 5xx are retried up to
/// `cfg.max_retries` times with exponential backoff. Authentication
/// failures and malformed answers are returned at once.
pub fn llm_instantiate(spec: &PromptSpec, cfg: &LlmConfig) -> Result<TextPair, LlmError> {
    instantiate_with(&build_client(cfg)?, spec, cfg)
}

fn instantiate_with(
    client: &Client,
    spec: &PromptSpec,
    cfg: &LlmConfig,
) -> Result<TextPair, LlmError> {
    let body = json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [
            {"role": "system", "content": spec.system},
            {"role": "user", "content": spec.user},
        ],
    });
    let url = cfg.url();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut req = client.post(&url).json(&body);
        if let Some(key) = &cfg.api_key {
            req = req.bearer_auth(key);
        }
        let retryable = match req.send() {
            Err(e) => LlmError::Network {
                attempts,
                message: e.to_string(),
            },
            Ok(resp) => {
                let status = resp.status();
                if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
                    return Err(LlmError::Auth {
                        status: status.as_u16(),
                    });
                }
                let text = match resp.text() {
                    Ok(t) => t,
                    Err(e) => {
                        return Err(LlmError::Network {
                            attempts,
                            message: e.to_string(),
                        })
                    }
                };
                if status.is_success() {
                    return parse_completion(&text);
                }
                let err = LlmError::Status {
                    status: status.as_u16(),
                    attempts,
                    body: text.chars().take(200).collect(),
                };
                if status != StatusCode::TOO_MANY_REQUESTS && !status.is_server_error() {
                    return Err(err);
                }
                err
            }
        };
        if attempts > cfg.max_retries {
            return Err(retryable);
        }
        std::thread::sleep(cfg.backoff * 2u32.saturating_pow(attempts - 1));
    }
}

/// Extracts `{text_a, text_b}` from a chat-completion response body. The
/// message content may wrap the object in a code fence or prose.
pub fn parse_completion(body: &str) -> Result<TextPair, LlmError> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| LlmError::Malformed(format!("response is not JSON: {e}")))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Malformed("no choices[0].message.content".into()))?;
    let (start, end) = (content.find('{'), content.rfind('}'));
    let object = match (start, end) {
        (Some(s), Some(e)) if s < e => &content[s..=e],
        _ => {
            return Err(LlmError::Malformed(
                "message content holds no JSON object".into(),
            ))
        }
    };
    let pair: TextPair = serde_json::from_str(object)
        .map_err(|e| LlmError::Malformed(format!("message content: {e}")))?;
    if pair.text_a.trim().is_empty() || pair.text_b.trim().is_empty() {
        return Err(LlmError::Malformed("empty text field".into()));
    }
    Ok(TextPair {
        text_a: pair.text_a.trim().to_string(),
        text_b: pair.text_b.trim().to_string(),
    })
}

/// Runs [`llm_instantiate`] over `specs` with at most `cfg.max_in_flight`
/// concurrent requests. Results come back in input order.
pub fn llm_instantiate_all(
    specs: &[PromptSpec],
    cfg: &LlmConfig,
) -> Vec<Result<TextPair, LlmError>> {
    let client = match build_client(cfg) {
        Ok(c) => c,
        Err(e) => return specs.iter().map(|_| Err(e.clone())).collect(),
    };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<TextPair, LlmError>>>> =
        Mutex::new(vec![None; specs.len()]);
    let workers = cfg.max_in_flight.clamp(1, specs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(i) else { break };
                let r = instantiate_with(&client, spec, cfg);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every index is processed"))
        .collect()
}
