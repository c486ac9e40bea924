//! Optional HTTP gateway for collecting predictions from an
//! OpenAI-compatible chat-completion endpoint. Requests fan out over a
//! bounded pool of worker threads; transient failures are retried with
//! exponential backoff, and every finished prediction is handed to a
//! callback so callers can persist partial progress.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::records::Prediction;

/// Environment variable holding the API key sent as a bearer token.
pub const API_KEY_VAR: &str = "MODEL_API_KEY";

const MAX_RETRIES: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(500);

#[derive(Clone, Debug)]
pub struct GatewayConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub concurrency: usize,
}

impl GatewayConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> GatewayConfig {
        GatewayConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: 0.0,
            max_tokens: None,
            concurrency: 4,
        }
    }
}

/// One prompt to send, tagged with the task it answers.
#[derive(Clone, Debug)]
pub struct PromptRequest {
    pub task_id: String,
    pub text: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("missing API key: set the {API_KEY_VAR} environment variable")]
    MissingApiKey,
    #[error("endpoint rejected the API key (HTTP {status})")]
    Auth { status: u16 },
    #[error("endpoint unreachable: {last_error}")]
    Unreachable { last_error: String },
}

enum RequestOutcome {
    Text(String),
    /// Retries exhausted without ever reaching the endpoint.
    NoContact(String),
    AuthRejected(u16),
}

fn chat_url(endpoint: &str) -> String {
    format!("{}/chat/completions", endpoint.trim_end_matches('/'))
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

fn send_once(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: &str,
    config: &GatewayConfig,
    prompt: &PromptRequest,
) -> Result<reqwest::blocking::Response, reqwest::Error> {
    let mut body = json!({
        "model": config.model,
        "messages": [{"role": "user", "content": prompt.text}],
        "temperature": config.temperature,
    });
    if let Some(max_tokens) = config.max_tokens {
        body["max_tokens"] = json!(max_tokens);
    }
    client.post(url).bearer_auth(api_key).json(&body).send()
}

fn request_with_retries(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: &str,
    config: &GatewayConfig,
    prompt: &PromptRequest,
) -> RequestOutcome {
    let mut contacted = false;
    let mut last_error = String::new();
    for attempt in 0..=MAX_RETRIES {
        if attempt > 0 {
            std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
        }
        match send_once(client, url, api_key, config, prompt) {
            Ok(response) => {
                contacted = true;
                let status = response.status();
                if status == reqwest::StatusCode::UNAUTHORIZED
                    || status == reqwest::StatusCode::FORBIDDEN
                {
                    return RequestOutcome::AuthRejected(status.as_u16());
                }
                if status.is_success() {
                    match response.json::<ChatResponse>() {
                        Ok(parsed) => {
                            let text = parsed
                                .choices
                                .into_iter()
                                .next()
                                .map(|c| c.message.content)
                                .unwrap_or_default();
                            return RequestOutcome::Text(text);
                        }
                        Err(e) => {
                            log::warn!(
                                "task {}: unparseable completion response: {e}",
                                prompt.task_id
                            );
                            return RequestOutcome::Text(String::new());
                        }
                    }
                }
                last_error = format!("HTTP {}", status.as_u16());
                let retryable =
                    status == reqwest::StatusCode::TOO_MANY_REQUESTS || status.is_server_error();
                if !retryable {
                    break;
                }
                log::warn!(
                    "task {}: attempt {} failed with {last_error}, retrying",
                    prompt.task_id,
                    attempt + 1
                );
            }
            Err(e) => {
                last_error = e.to_string();
                log::warn!(
                    "task {}: attempt {} failed: {last_error}",
                    prompt.task_id,
                    attempt + 1
                );
            }
        }
    }
    if contacted {
        log::warn!(
            "task {}: giving up after retries ({last_error}); recording empty output",
            prompt.task_id
        );
        RequestOutcome::Text(String::new())
    } else {
        RequestOutcome::NoContact(last_error)
    }
}

/// Sends every prompt to the configured endpoint and returns predictions
/// in prompt order. `on_result` fires once per finished prediction, in
/// completion order, so callers can persist partial progress.
///
/// Individual request failures degrade to empty predictions; the whole
/// call fails only when the API key is missing or rejected, or when the
/// endpoint could not be reached for any request at all.
pub fn query_model(
    config: &GatewayConfig,
    prompts: &[PromptRequest],
    mut on_result: impl FnMut(&Prediction),
) -> Result<Vec<Prediction>, GatewayError> {
    let api_key = std::env::var(API_KEY_VAR).map_err(|_| GatewayError::MissingApiKey)?;
    if prompts.is_empty() {
        return Ok(Vec::new());
    }

    let url = chat_url(&config.endpoint);
    let workers = config.concurrency.clamp(1, prompts.len());
    let cursor = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (sender, receiver) = mpsc::channel::<(usize, RequestOutcome)>();

    let mut slots: Vec<Option<Prediction>> = vec![None; prompts.len()];
    let mut auth_failure: Option<u16> = None;
    let mut contact_failures: Vec<String> = Vec::new();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let sender = sender.clone();
            let cursor = &cursor;
            let stop = &stop;
            let url = &url;
            let api_key = &api_key;
            scope.spawn(move || {
                let client = reqwest::blocking::Client::new();
                loop {
                    if stop.load(Ordering::Relaxed) {
                        return;
                    }
                    let index = cursor.fetch_add(1, Ordering::Relaxed);
                    if index >= prompts.len() {
                        return;
                    }
                    let outcome =
                        request_with_retries(&client, url, api_key, config, &prompts[index]);
                    if matches!(outcome, RequestOutcome::AuthRejected(_)) {
                        stop.store(true, Ordering::Relaxed);
                    }
                    if sender.send((index, outcome)).is_err() {
                        return;
                    }
                }
            });
        }
        drop(sender);

        for (index, outcome) in receiver {
            match outcome {
                RequestOutcome::Text(raw_output) => {
                    let prediction = Prediction {
                        id: prompts[index].task_id.clone(),
                        raw_output,
                    };
                    on_result(&prediction);
                    slots[index] = Some(prediction);
                }
                RequestOutcome::NoContact(error) => contact_failures.push(error),
                RequestOutcome::AuthRejected(status) => auth_failure = Some(status),
            }
        }
    });

    if let Some(status) = auth_failure {
        return Err(GatewayError::Auth { status });
    }
    if slots.iter().all(Option::is_none) {
        if let Some(last_error) = contact_failures.pop() {
            return Err(GatewayError::Unreachable { last_error });
        }
    }
    Ok(slots
        .into_iter()
        .zip(prompts)
        .map(|(slot, prompt)| {
            slot.unwrap_or_else(|| Prediction {
                id: prompt.task_id.clone(),
                raw_output: String::new(),
            })
        })
        .collect())
}
