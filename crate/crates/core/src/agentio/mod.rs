//! Everything between the engine and a black-box routing agent: prompt
//! rendering, the HTTP client, local simulators and the run store.

use thiserror::Error;

pub mod client;
pub mod prompt;
pub mod simulate;
pub mod store;

pub use client::{query_agent, AgentReply, Backoff, EndpointConfig, Failure, HttpTransport, RetryPolicy, Transport};
pub use prompt::{render_prompt, AgentRequest, PromptTemplate, NO_CURRENT_MARKER};
pub use simulate::{simulate_agent, Behavior, Simulator};
pub use store::{
    append_runs, load_runs, read_runs, store_runs, unix_now, IntegrityFlag, Interaction, LoadedRuns, RunRecord,
    StoreError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("agent returned status {code}: {excerpt}")]
    Status { code: u16, excerpt: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
}
