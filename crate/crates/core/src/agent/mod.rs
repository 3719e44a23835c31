//! The per-turn clarification loop: analyze the category under the known
//! demands, search items, and ask the next questions.

mod memory;
mod planner;
mod questions;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{fold, summarize, Catalog, CategoryStatistics, ProductItem, StructuredQuery, DEFAULT_TOP_M};
use crate::llm_bridge::{BridgeFailure, LlmBridge};
use crate::retrieval::{RetrieverKind, SearchEngine};

pub use memory::{
    is_other, Answer, ClarificationQuestion, DemandRecord, FailureCounters, Payload, QuestionError, Role,
    SessionMemory, TranscriptRecord, TurnOutput, Utterance, MAX_CANDIDATES, MIN_CANDIDATES, OTHER,
};
pub use planner::{build_structured_query, generate_nl_query, parse_user_reply};
pub use questions::{entropy_bits, generate_questions, question_text, OPTIONS_PER_QUESTION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("unknown category `{category}`")]
    UnknownCategory { category: String, available: Vec<String> },
    #[error("session already has a category")]
    AlreadyStarted,
    #[error("session has not been given a category yet")]
    NotStarted,
    #[error("no questions are pending")]
    NoPendingQuestions,
    #[error("expected {expected} answers, got {got}")]
    AnswerCountMismatch { expected: usize, got: usize },
    #[error("no facet left to ask about")]
    NoAskableFacet,
    #[error("internal error: {0}")]
    Internal(String),
}

/// Where category statistics come from each turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StatsSource {
    /// No statistics at all.
    None,
    /// A seeded random sample of the category, ignoring demands.
    Random,
    /// Top items for the keyword query under BM25.
    Bm25,
    /// Top items for the keyword query under dense retrieval.
    Dense,
    /// Items matching the structured query built from the demands.
    #[default]
    Structured,
}

impl StatsSource {
    pub fn as_str(self) -> &'static str {
        match self {
            StatsSource::None => "none",
            StatsSource::Random => "random",
            StatsSource::Bm25 => "bm25",
            StatsSource::Dense => "dense",
            StatsSource::Structured => "structured",
        }
    }
}

impl fmt::Display for StatsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatsSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(StatsSource::None),
            "random" => Ok(StatsSource::Random),
            "bm25" => Ok(StatsSource::Bm25),
            "dense" => Ok(StatsSource::Dense),
            "structured" | "sql" => Ok(StatsSource::Structured),
            other => Err(format!("unknown statistics source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Questions per turn.
    pub n: usize,
    /// Items returned per turn.
    pub k: usize,
    /// Cap on items feeding the statistics.
    pub max_number: usize,
    /// Values kept per facet in statistics.
    pub top_m: usize,
    pub retriever: RetrieverKind,
    pub rerank: bool,
    pub stats_source: StatsSource,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            n: 3,
            k: 10,
            max_number: 100,
            top_m: DEFAULT_TOP_M,
            retriever: RetrieverKind::Bm25,
            rerank: false,
            stats_source: StatsSource::Structured,
            seed: 0,
        }
    }
}

/// First user utterance or a reply to pending questions.
#[derive(Debug, Clone, PartialEq)]
pub enum UserInput {
    Start { category: String, query: Option<String> },
    Answers(Vec<Answer>),
}

impl UserInput {
    pub fn category(category: impl Into<String>) -> Self {
        UserInput::Start { category: category.into(), query: None }
    }
}

/// Stateless driver of sessions over a shared catalog and search engine.
#[derive(Clone)]
pub struct Agent {
    catalog: Arc<Catalog>,
    engine: Arc<SearchEngine>,
    config: AgentConfig,
    bridge: Option<Arc<LlmBridge>>,
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Agent")
            .field("items", &self.catalog.len())
            .field("config", &self.config)
            .field("bridge", &self.bridge.is_some())
            .finish()
    }
}

/// Mixes a session seed with a turn number into an independent stream seed.
pub fn turn_seed(seed: u64, turn: usize) -> u64 {
    let mut z = seed ^ (turn as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Agent {
    pub fn new(catalog: Arc<Catalog>, engine: Arc<SearchEngine>, config: AgentConfig) -> Self {
        Agent { catalog, engine, config, bridge: None }
    }

    /// Builds the default search engine for `catalog`.
    pub fn from_catalog(catalog: Catalog, config: AgentConfig) -> Result<Self, crate::retrieval::RetrievalError> {
        let engine = SearchEngine::from_catalog(&catalog)?;
        Ok(Agent::new(Arc::new(catalog), Arc::new(engine), config))
    }

    /// Routes query and question generation through a language model,
    /// with the deterministic tools as fallback.
    pub fn with_bridge(mut self, bridge: Arc<LlmBridge>) -> Self {
        self.bridge = Some(bridge);
        self
    }

    pub fn with_config(&self, config: AgentConfig) -> Self {
        Agent { config, ..self.clone() }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn engine(&self) -> &SearchEngine {
        &self.engine
    }

    /// Fresh memory seeded from the agent configuration.
    pub fn open_session(&self, session_id: impl Into<String>) -> SessionMemory {
        SessionMemory::new(session_id, self.config.seed)
    }

    /// Runs one agent turn.
    ///
    /// The first call must carry the category; each later call answers the
    /// questions of the previous turn. When no question can be generated the
    /// output has `exhausted` set and no questions, and the session accepts
    /// no further replies.
    pub fn step(&self, memory: &mut SessionMemory, input: UserInput) -> Result<TurnOutput, AgentError> {
        let turn = memory.agent_turns() + 1;
        let user_payload = match input {
            UserInput::Start { category, query } => {
                if memory.category.is_some() {
                    return Err(AgentError::AlreadyStarted);
                }
                let resolved = self.catalog.resolve_category(&category).ok_or_else(|| AgentError::UnknownCategory {
                    category: category.clone(),
                    available: self.catalog.categories().into_iter().map(String::from).collect(),
                })?;
                memory.category = Some(resolved.to_string());
                memory.initial_query = query.clone().filter(|q| !q.trim().is_empty());
                Payload::Category { category, query }
            }
            UserInput::Answers(answers) => {
                if memory.category.is_none() {
                    return Err(AgentError::NotStarted);
                }
                if memory.pending_questions.is_empty() {
                    return Err(AgentError::NoPendingQuestions);
                }
                if answers.len() != memory.pending_questions.len() {
                    return Err(AgentError::AnswerCountMismatch {
                        expected: memory.pending_questions.len(),
                        got: answers.len(),
                    });
                }
                let demands = parse_user_reply(&answers, &memory.pending_questions, turn - 1);
                memory.demands.extend(demands);
                memory.pending_questions.clear();
                Payload::Answers { answers }
            }
        };
        memory.dialogue_log.push(Utterance { turn, role: Role::User, payload: user_payload });

        let stats = self.analyze(memory, self.config.stats_source)?;

        let query = match &self.bridge {
            Some(bridge) => bridge.generate_nl_query(memory).unwrap_or_else(|_| generate_nl_query(memory)),
            None => generate_nl_query(memory),
        };
        let mut items = self.engine.search(&query, self.config.retriever, self.config.k);
        if self.config.rerank {
            items = self.engine.rerank(&query, &items, self.config.k);
        }

        let questions = match &self.bridge {
            Some(bridge) => bridge
                .generate_questions(memory, &stats, self.config.n)
                .or_else(|_| generate_questions(memory, &stats, self.config.n)),
            None => generate_questions(memory, &stats, self.config.n),
        };
        let (questions, exhausted) = match questions {
            Ok(q) => (q, false),
            Err(AgentError::NoAskableFacet) => (Vec::new(), true),
            Err(e) => return Err(e),
        };

        memory.asked_questions.extend(questions.iter().cloned().map(|q| (turn, q)));
        memory.pending_questions = questions.clone();
        memory.search_history.push(items.ids().map(String::from).collect());
        memory.stats_history.push(stats);
        let output = TurnOutput { turn, query, questions, items, exhausted };
        memory.dialogue_log.push(Utterance { turn, role: Role::Agent, payload: Payload::Turn(output.clone()) });
        Ok(output)
    }

    /// Category statistics for the current demands under `source`,
    /// updating the session's failure counters.
    pub fn analyze(&self, memory: &mut SessionMemory, source: StatsSource) -> Result<CategoryStatistics, AgentError> {
        let category = memory.category.clone().ok_or(AgentError::NotStarted)?;
        if !self.catalog.has_category(&category) {
            return Err(AgentError::UnknownCategory {
                category,
                available: self.catalog.categories().into_iter().map(String::from).collect(),
            });
        }
        let cap = self.config.max_number;
        let pool: Vec<&ProductItem> = match source {
            StatsSource::None => return Ok(CategoryStatistics::empty(category)),
            StatsSource::Random => {
                let bucket: Vec<&ProductItem> = self.catalog.bucket(&category).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(turn_seed(memory.seed, memory.agent_turns() + 1));
                let mut picked = index::sample(&mut rng, bucket.len(), cap.min(bucket.len())).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|i| bucket[i]).collect()
            }
            StatsSource::Bm25 | StatsSource::Dense => {
                let kind = if source == StatsSource::Bm25 { RetrieverKind::Bm25 } else { RetrieverKind::Dense };
                let query = generate_nl_query(memory);
                let ranked = self.engine.search(&query, kind, self.catalog.len());
                let key = fold(&category);
                let mut pool: Vec<&ProductItem> = ranked
                    .ids()
                    .filter_map(|id| self.catalog.get(id))
                    .filter(|item| fold(&item.category) == key)
                    .take(cap)
                    .collect();
                if pool.is_empty() {
                    pool = self.catalog.bucket(&category).take(cap).collect();
                }
                pool
            }
            StatsSource::Structured => {
                memory.counters.structured_attempts += 1;
                let planned: Result<StructuredQuery, BridgeFailure> = match &self.bridge {
                    Some(bridge) => match bridge.text2sql(memory, cap) {
                        Err(BridgeFailure::Backend(_)) => Ok(build_structured_query(memory, cap)),
                        other => other,
                    },
                    None => Ok(build_structured_query(memory, cap)),
                };
                let matched = match &planned {
                    Ok(q) => self.catalog.execute(q),
                    Err(_) => Vec::new(),
                };
                if matched.is_empty() {
                    match planned {
                        Ok(_) => memory.counters.trivial_query += 1,
                        Err(_) => memory.counters.invalid_query += 1,
                    }
                    self.fallback_pool(memory, &category)
                } else {
                    matched
                }
            }
        };
        summarize(pool, self.config.top_m).map_err(|e| AgentError::Internal(e.to_string()))
    }

    /// Previous turn's retrieved items in the category, or the category
    /// bucket when there is no usable history.
    fn fallback_pool(&self, memory: &SessionMemory, category: &str) -> Vec<&ProductItem> {
        let key = fold(category);
        let previous: Vec<&ProductItem> = memory
            .search_history
            .last()
            .into_iter()
            .flatten()
            .filter_map(|id| self.catalog.get(id))
            .filter(|item| fold(&item.category) == key)
            .collect();
        if previous.is_empty() {
            self.catalog.bucket(category).take(self.config.max_number).collect()
        } else {
            previous
        }
    }
}

/// Statistics for the session under `source` using the deterministic
/// tools; see [`Agent::analyze`].
pub fn analyze_category(
    memory: &mut SessionMemory,
    catalog: Arc<Catalog>,
    engine: Arc<SearchEngine>,
    config: &AgentConfig,
    source: StatsSource,
) -> Result<CategoryStatistics, AgentError> {
    Agent::new(catalog, engine, config.clone()).analyze(memory, source)
}
