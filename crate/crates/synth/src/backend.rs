use std::fmt;
use std::path::PathBuf;
use std::thread::sleep;
use std::time::Duration;

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};

use crate::oracle;
use crate::transcript::{request_digest, Exchange, Message, Transcript};
use crate::SynthError;

pub const ENV_BASE_URL: &str = "METACTL_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "METACTL_LLM_API_KEY";
pub const ENV_MODEL: &str = "METACTL_LLM_MODEL";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    /// OpenAI-compatible chat completions over HTTP.
    Live,
    /// Recorded transcript, answered in order.
    Replay(PathBuf),
    /// Canned responses for a task id.
    Oracle(String),
}

#[derive(Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub timeout: Duration,
    /// Retries after the first live request.
    pub retries: u32,
    /// First backoff delay; doubled on each retry.
    pub backoff: Duration,
}

impl fmt::Debug for BackendConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendConfig")
            .field("kind", &self.kind)
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .finish()
    }
}

impl BackendConfig {
    fn with_kind(kind: BackendKind) -> BackendConfig {
        BackendConfig {
            kind,
            base_url: None,
            api_key: None,
            model: String::new(),
            temperature: 1.0,
            timeout: Duration::from_secs(120),
            retries: 3,
            backoff: Duration::from_secs(1),
        }
    }

    pub fn oracle(task_id: &str) -> BackendConfig {
        Self::with_kind(BackendKind::Oracle(task_id.into()))
    }

    pub fn replay(path: impl Into<PathBuf>) -> BackendConfig {
        Self::with_kind(BackendKind::Replay(path.into()))
    }

    /// Live backend configured from `METACTL_LLM_BASE_URL`, `METACTL_LLM_API_KEY`
    /// and `METACTL_LLM_MODEL`.
    pub fn live_from_env() -> BackendConfig {
        let var = |k| {
            std::env::var(k)
                .ok()
                .filter(|v: &String| !v.trim().is_empty())
        };
        BackendConfig {
            base_url: var(ENV_BASE_URL),
            api_key: var(ENV_API_KEY),
            model: var(ENV_MODEL).unwrap_or_else(|| "gpt-4".into()),
            ..Self::with_kind(BackendKind::Live)
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(SynthError::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        match &self.kind {
            BackendKind::Live => {
                if self.base_url.is_none() {
                    return Err(SynthError::Config(format!(
                        "live backend needs {ENV_BASE_URL}"
                    )));
                }
                if self.api_key.is_none() {
                    return Err(SynthError::Config(format!(
                        "live backend needs {ENV_API_KEY}"
                    )));
                }
            }
            BackendKind::Oracle(task) if !oracle::known_task(task) => {
                return Err(SynthError::Config(format!(
                    "oracle has no fixtures for task '{task}'"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

enum State {
    Live(reqwest::blocking::Client),
    Replay {
        records: Vec<Exchange>,
        cursor: usize,
    },
    Oracle,
}

/// A configured backend plus the transcript of everything it answered.
pub struct Session {
    config: BackendConfig,
    state: State,
    pub transcript: Transcript,
}

impl Session {
    pub fn new(config: BackendConfig, transcript: Transcript) -> Result<Session, SynthError> {
        config.validate()?;
        let state = match &config.kind {
            BackendKind::Live => State::Live(
                reqwest::blocking::Client::builder()
                    .timeout(config.timeout)
                    .build()
                    .map_err(|e| SynthError::Backend(format!("http client: {e}")))?,
            ),
            BackendKind::Replay(path) => State::Replay {
                records: Transcript::load(path)?,
                cursor: 0,
            },
            BackendKind::Oracle(_) => State::Oracle,
        };
        Ok(Session {
            config,
            state,
            transcript,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// One response to `messages`; the exchange is appended to the transcript.
    pub fn respond(
        &mut self,
        stage: &str,
        attempt: usize,
        messages: &[Message],
    ) -> Result<String, SynthError> {
        let digest = request_digest(messages);
        let response = match &mut self.state {
            State::Live(client) => live_respond(client, &self.config, messages)?,
            State::Replay { records, cursor } => {
                let Some(rec) = records.get(*cursor) else {
                    return Err(SynthError::Backend(format!(
                        "replay transcript exhausted after {} exchanges ({stage}, attempt {attempt})",
                        records.len()
                    )));
                };
                if rec.request_digest != digest {
                    let index = (0..messages.len().max(rec.request.len()))
                        .find(|&i| messages.get(i) != rec.request.get(i))
                        .unwrap_or(0);
                    return Err(SynthError::DigestMismatch {
                        exchange: *cursor,
                        message_index: index,
                    });
                }
                *cursor += 1;
                rec.response.clone()
            }
            State::Oracle => {
                let BackendKind::Oracle(task) = &self.config.kind else {
                    unreachable!()
                };
                oracle::response(task, stage, attempt)
                    .ok_or_else(|| {
                        SynthError::Backend(format!(
                            "oracle has no response for ({task}, {stage}, attempt {attempt})"
                        ))
                    })?
                    .to_string()
            }
        };
        self.transcript.append(Exchange {
            stage: stage.into(),
            attempt,
            request_digest: digest,
            request: messages.to_vec(),
            response: response.clone(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        })?;
        Ok(response)
    }
}

fn live_respond(
    client: &reqwest::blocking::Client,
    cfg: &BackendConfig,
    messages: &[Message],
) -> Result<String, SynthError> {
    let url = format!(
        "{}/chat/completions",
        cfg.base_url
            .as_deref()
            .unwrap_or_default()
            .trim_end_matches('/')
    );
    let body = json!({ "model": cfg.model, "temperature": cfg.temperature, "messages": messages });
    let mut delay = cfg.backoff;
    let mut last = String::new();
    for attempt in 0..=cfg.retries {
        if attempt > 0 {
            sleep(delay);
            delay *= 2;
        }
        let sent = client
            .post(&url)
            .bearer_auth(cfg.api_key.as_deref().unwrap_or_default())
            .json(&body)
            .send();
        let resp = match sent {
            Ok(r) => r,
            Err(e) if e.is_timeout() || e.is_connect() || e.is_request() => {
                last = format!("request failed: {e}");
                continue;
            }
            Err(e) => return Err(SynthError::Backend(format!("request failed: {e}"))),
        };
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| SynthError::Backend(format!("reading response: {e}")))?;
        if status.as_u16() == 429 || status.is_server_error() {
            last = format!("HTTP {status}: {}", snippet(&text));
            continue;
        }
        if !status.is_success() {
            return Err(SynthError::Backend(format!(
                "HTTP {status}: {}",
                snippet(&text)
            )));
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| SynthError::Backend(format!("malformed response: {e}")))?;
        return v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                SynthError::Backend(format!(
                    "response has no choices[0].message.content: {}",
                    snippet(&text)
                ))
            });
    }
    Err(SynthError::Backend(format!(
        "giving up after {} retries; last error: {last}",
        cfg.retries
    )))
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}
