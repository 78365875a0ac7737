//! Chat-completion client with bounded retries.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::prompt::AgentRequest;
use super::AgentError;

/// Environment variable holding the agent credential unless configured
/// otherwise.
pub const DEFAULT_KEY_ENV: &str = "CLAUSEROUTE_API_KEY";

/// Longest response-body excerpt kept in a status error.
const EXCERPT_LEN: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Backoff {
    pub initial_ms: u64,
    pub factor: f64,
    pub max_ms: u64,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            initial_ms: 500,
            factor: 2.0,
            max_ms: 30_000,
        }
    }
}

impl Backoff {
    /// Delay before retry number `retry` (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let ms = self.initial_ms as f64 * self.factor.powi(retry as i32);
        Duration::from_millis(ms.min(self.max_ms as f64) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub backoff: Backoff,
    /// Decoding settings, passed through only when set.
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

fn default_key_env() -> String {
    DEFAULT_KEY_ENV.to_string()
}

fn default_timeout() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: default_key_env(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff: Backoff::default(),
            temperature: None,
            max_tokens: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, AgentError> {
        toml::from_str(text).map_err(|e| AgentError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AgentError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            backoff: self.backoff.clone(),
        }
    }
}

/// One failed exchange, as seen by the retry loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// Connection, timeout or body-read failure; worth retrying.
    Transient(String),
    Status { code: u16, body: String },
    /// A success status whose body is not a chat completion.
    Protocol(String),
}

impl Failure {
    fn retryable(&self) -> bool {
        match self {
            Failure::Transient(_) => true,
            Failure::Status { code, .. } => *code == 408 || *code == 429 || *code >= 500,
            Failure::Protocol(_) => false,
        }
    }
}

/// Sends one prompt and returns the reply text.
pub trait Transport {
    fn send(&self, prompt: &str) -> Result<String, Failure>;
}

impl<F: Fn(&str) -> Result<String, Failure>> Transport for F {
    fn send(&self, prompt: &str) -> Result<String, Failure> {
        self(prompt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub backoff: Backoff,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: default_retries(),
            backoff: Backoff::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReply {
    pub text: String,
    pub attempts: u32,
}

impl AgentReply {
    pub fn retries(&self) -> u32 {
        self.attempts - 1
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(EXCERPT_LEN).collect()
}

/// Sends `req`, retrying transient failures with exponential backoff.
/// `sleep` is called between attempts so tests can skip real waiting.
pub fn query_agent<T: Transport + ?Sized>(
    req: &AgentRequest,
    transport: &T,
    policy: &RetryPolicy,
    sleep: &mut dyn FnMut(Duration),
) -> Result<AgentReply, AgentError> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let failure = match transport.send(&req.rendered_prompt) {
            Ok(text) => return Ok(AgentReply { text, attempts }),
            Err(f) => f,
        };
        if !failure.retryable() || attempts > policy.max_retries {
            return Err(match failure {
                Failure::Transient(message) => AgentError::Transport { attempts, message },
                Failure::Status { code, body } => AgentError::Status {
                    code,
                    excerpt: excerpt(&body),
                },
                Failure::Protocol(message) => AgentError::Protocol(message),
            });
        }
        sleep(policy.backoff.delay(attempts - 1));
    }
}

/// Blocking HTTP transport for chat-completion style APIs.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    model: String,
    key: String,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
}

impl HttpTransport {
    /// Reads the credential from the configured environment variable.
    pub fn new(config: &EndpointConfig) -> Result<Self, AgentError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| AgentError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpTransport {
            agent,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            model: config.model.clone(),
            key,
            temperature: config.temperature,
            max_tokens: config.max_tokens,
        })
    }

    fn body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        if let Some(t) = self.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(m) = self.max_tokens {
            body["max_tokens"] = json!(m);
        }
        body
    }
}

/// Pulls `choices[0].message.content` out of a completion body.
pub fn completion_text(body: &str) -> Result<String, Failure> {
    let value: Value = serde_json::from_str(body).map_err(|e| Failure::Protocol(format!("invalid JSON: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Failure::Protocol(format!("no completion text in {}", excerpt(body))))
}

impl Transport for HttpTransport {
    fn send(&self, prompt: &str) -> Result<String, Failure> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.key))
            .send_json(self.body(prompt))
            .map_err(|e| Failure::Transient(e.to_string()))?;
        let code = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Transient(e.to_string()))?;
        if !(200..300).contains(&code) {
            return Err(Failure::Status { code, body });
        }
        completion_text(&body)
    }
}
