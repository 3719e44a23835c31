//! Model-backed variants of the agent's tools. Every entry point returns a
//! [`BridgeFailure`] instead of guessing, so callers can fall back to the
//! deterministic implementation.

mod backend;
mod prompts;
mod question_json;
mod sql;
mod template;

use std::collections::HashSet;
use std::sync::Arc;

pub use backend::{
    BackendError, BackendSettings, ChatBackend, FnBackend, GuardedBackend, API_KEY_VAR, DEFAULT_RETRIES,
    DEFAULT_TIMEOUT, ENDPOINT_VAR, MODEL_VAR,
};
pub use prompts::{
    PromptSet, DOC2QUERY, QUERY_GENERATION, QUESTION_GENERATION, QUESTION_JSON_DESCRIPTION, TEXT2SQL, USER_SIMULATOR,
};
pub use question_json::parse_question_json;
pub use sql::{classify_sql, schema_description, to_sql, validate_sql_like, InvalidSql, SqlOutcome, DIALECT};
pub use template::{Bindings, PromptTemplate, Slot, TemplateError};

use crate::agent::{Answer, ClarificationQuestion, SessionMemory, OTHER};
use crate::catalog::{CategoryStatistics, ProductItem, StructuredQuery};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BridgeFailure {
    #[error(transparent)]
    Backend(#[from] BackendError),
    /// Output that parsed but breaks the query grammar.
    #[error("invalid query: {0}")]
    Invalid(String),
    #[error("malformed_llm_output: {0}")]
    Malformed(String),
}

impl From<TemplateError> for BridgeFailure {
    fn from(e: TemplateError) -> Self {
        BridgeFailure::Malformed(format!("prompt rendering failed: {e}"))
    }
}

/// Question/answer pairs from a session, as bound to the history slots.
pub fn history_pairs(memory: &SessionMemory) -> Vec<(String, String)> {
    memory
        .demands
        .iter()
        .map(|d| {
            let mut parts: Vec<String> = d.chosen_options.clone();
            if let Some(t) = &d.free_text {
                parts.retain(|p| p != OTHER);
                parts.push(t.clone());
            }
            (d.question_text.clone(), parts.join(", "))
        })
        .collect()
}

fn first_line(text: &str, labels: &[&str]) -> String {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let mut line = line;
    for label in labels {
        if let Some(rest) = line.strip_prefix(label) {
            line = rest.trim();
        }
    }
    line.trim_matches(|c| c == '"' || c == '\'' || c == '`').trim().to_string()
}

pub struct LlmBridge {
    backend: Arc<dyn ChatBackend>,
    prompts: PromptSet,
}

impl std::fmt::Debug for LlmBridge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmBridge").finish_non_exhaustive()
    }
}

impl LlmBridge {
    /// Wraps `backend` in the default timeout and retry policy.
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        LlmBridge::unguarded(Arc::new(GuardedBackend::new(backend)))
    }

    /// Uses `backend` as is, for callers that already enforce a policy.
    pub fn unguarded(backend: Arc<dyn ChatBackend>) -> Self {
        LlmBridge { backend, prompts: PromptSet::default() }
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    fn category(memory: &SessionMemory) -> String {
        memory.category.clone().unwrap_or_default()
    }

    pub fn render_text2sql(&self, memory: &SessionMemory, max_number: usize) -> Result<String, TemplateError> {
        let b = Bindings::new()
            .set(Slot::Dialect, DIALECT)
            .set(Slot::MaxNumber, max_number.to_string())
            .set(Slot::Schema, schema_description())
            .set(Slot::Category, Self::category(memory))
            .with_history(history_pairs(memory));
        self.prompts.text2sql.render(&b)
    }

    pub fn text2sql(&self, memory: &SessionMemory, max_number: usize) -> Result<StructuredQuery, BridgeFailure> {
        let reply = self.backend.complete(&self.render_text2sql(memory, max_number)?)?;
        validate_sql_like(&reply).map_err(|e| BridgeFailure::Invalid(e.reason))
    }

    pub fn generate_nl_query(&self, memory: &SessionMemory) -> Result<String, BridgeFailure> {
        let b = Bindings::new().set(Slot::Category, Self::category(memory)).with_history(history_pairs(memory));
        let reply = self.backend.complete(&self.prompts.query_generation.render(&b)?)?;
        let query = first_line(&reply, &["Query:"]);
        if query.is_empty() {
            return Err(BridgeFailure::Malformed("empty query".into()));
        }
        Ok(query)
    }

    /// Model-written questions, minus any that repeat an asked question or
    /// share a facet with an earlier one in the reply; at most `n`.
    pub fn generate_questions(
        &self,
        memory: &SessionMemory,
        stats: &CategoryStatistics,
        n: usize,
    ) -> Result<Vec<ClarificationQuestion>, BridgeFailure> {
        let b = Bindings::new()
            .set(Slot::Category, Self::category(memory))
            .set(Slot::Statistics, stats.render())
            .set(Slot::JsonDescription, QUESTION_JSON_DESCRIPTION)
            .with_history(history_pairs(memory));
        let reply = self.backend.complete(&self.prompts.question_generation.render(&b)?)?;
        let asked: HashSet<_> = memory.asked_questions.iter().map(|(_, q)| q.key()).collect();
        let mut out: Vec<ClarificationQuestion> = Vec::new();
        for q in parse_question_json(&reply)? {
            let dup_facet = q.facet.is_some() && out.iter().any(|o| o.facet == q.facet);
            if !asked.contains(&q.key()) && !dup_facet && out.len() < n {
                out.push(q);
            }
        }
        if out.is_empty() {
            return Err(BridgeFailure::Malformed("every generated question repeats an earlier one".into()));
        }
        Ok(out)
    }

    /// Answers `questions` as the holder of `item` would, one line each.
    pub fn simulate_answers(
        &self,
        item: &ProductItem,
        questions: &[ClarificationQuestion],
    ) -> Result<Vec<Answer>, BridgeFailure> {
        let item_json = serde_json::to_string(item).map_err(|e| BridgeFailure::Malformed(e.to_string()))?;
        let listing: Vec<String> = questions
            .iter()
            .enumerate()
            .map(|(i, q)| format!("{}. {} Options: {}", i + 1, q.text, q.candidates.join(", ")))
            .collect();
        let b = Bindings::new().set(Slot::Item, item_json).set(Slot::Questions, listing.join("\n"));
        let reply = self.backend.complete(&self.prompts.user_simulator.render(&b)?)?;
        let lines: Vec<&str> = reply.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if lines.len() != questions.len() {
            return Err(BridgeFailure::Malformed(format!("expected {} answer lines, got {}", questions.len(), lines.len())));
        }
        Ok(lines
            .iter()
            .zip(questions)
            .map(|(line, q)| {
                let line = line.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ')').trim();
                let mut picked: Vec<String> = Vec::new();
                for piece in line.split([',', ';', '，', '、']) {
                    if let Some(c) = q.find_candidate(piece.trim()) {
                        if !picked.iter().any(|p| p == c) {
                            picked.push(c.to_string());
                        }
                    }
                }
                if picked.len() > 1 {
                    picked.retain(|p| p != OTHER);
                }
                if picked.is_empty() {
                    Answer::other()
                } else {
                    Answer::select(picked)
                }
            })
            .collect())
    }

    pub fn doc2query(&self, item: &ProductItem) -> Result<String, BridgeFailure> {
        let item_json = serde_json::to_string(item).map_err(|e| BridgeFailure::Malformed(e.to_string()))?;
        let reply = self.backend.complete(&self.prompts.doc2query.render(&Bindings::new().set(Slot::Item, item_json))?)?;
        let query = first_line(&reply, &["Query:"]);
        if query.is_empty() {
            return Err(BridgeFailure::Malformed("empty query".into()));
        }
        Ok(query)
    }
}
