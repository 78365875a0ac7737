use std::path::Path;

use crate::zoo::{Endpoint, Zoo};

use super::AgentError;

/// The bundled router instructions.
pub const DEFAULT_TEMPLATE: &str = include_str!("../../data/prompt_template.txt");

/// Shown in place of the last model before any endpoint has been chosen.
pub const NO_CURRENT_MARKER: &str = "(none yet)";

const N: &str = "[N]";
const LAST_MODEL: &str = "[Last Model Metadata]";
const ZOO_CSV: &str = "[Full Model Zoo CSV]";
const PROMPT: &str = "[Prompt]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentRequest {
    pub rendered_prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            text: DEFAULT_TEMPLATE.to_string(),
        }
    }
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Self {
        PromptTemplate { text: text.into() }
    }

    pub fn from_path(path: &Path) -> Result<Self, AgentError> {
        std::fs::read_to_string(path)
            .map(PromptTemplate::new)
            .map_err(|e| AgentError::Config(format!("reading template {}: {e}", path.display())))
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Fills the template. The direction key becomes a `DIRECTION:` line
    /// under the free-form prompt; a template without a `[Prompt]` slot gets
    /// that section appended.
    pub fn render(&self, zoo: &Zoo, current: Option<&Endpoint>, prompt: &str, direction: &str) -> AgentRequest {
        let last = current.map_or_else(|| NO_CURRENT_MARKER.to_string(), |ep| zoo.render_row(ep));
        let csv = zoo.render_for_agent();
        let mut user = String::new();
        if !prompt.is_empty() {
            user.push_str(prompt.trim_end_matches('\n'));
            user.push('\n');
        }
        user.push_str("DIRECTION: ");
        user.push_str(direction);

        let mut text = self
            .text
            .replace(N, &zoo.len().to_string())
            .replace(LAST_MODEL, &last)
            .replace(ZOO_CSV, csv.trim_end_matches('\n'));
        if text.contains(PROMPT) {
            text = text.replace(PROMPT, &user);
        } else {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(&user);
            text.push('\n');
        }
        AgentRequest { rendered_prompt: text }
    }
}

/// Renders with the bundled template.
pub fn render_prompt(zoo: &Zoo, current: Option<&Endpoint>, prompt: &str, direction: &str) -> AgentRequest {
    PromptTemplate::default().render(zoo, current, prompt, direction)
}
