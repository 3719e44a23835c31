use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{fold, CategoryStatistics, FacetId};
use crate::retrieval::RankedList;

/// The escape option closing every candidate list.
pub const OTHER: &str = "Other";

pub const MIN_CANDIDATES: usize = 2;
pub const MAX_CANDIDATES: usize = 6;

pub fn is_other(value: &str) -> bool {
    fold(value) == "other"
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionError {
    #[error("question needs between {MIN_CANDIDATES} and {MAX_CANDIDATES} candidates including \"Other\", got {0}")]
    CandidateCount(usize),
    #[error("duplicate candidate `{0}`")]
    DuplicateCandidate(String),
    #[error("empty question text")]
    EmptyText,
}

/// Multi-choice question targeting one facet (or none, for free-form
/// questions from a language model). The last candidate is always "Other".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationQuestion {
    pub facet: Option<FacetId>,
    pub text: String,
    pub candidates: Vec<String>,
}

impl ClarificationQuestion {
    /// Builds a question from its concrete options; "Other" is appended (or
    /// moved to the end if already present).
    pub fn new(facet: Option<FacetId>, text: impl Into<String>, options: Vec<String>) -> Result<Self, QuestionError> {
        let text = text.into().trim().to_string();
        if text.is_empty() {
            return Err(QuestionError::EmptyText);
        }
        let mut candidates: Vec<String> = Vec::with_capacity(options.len() + 1);
        for option in options {
            let option = option.trim().to_string();
            if option.is_empty() || is_other(&option) {
                continue;
            }
            if candidates.iter().any(|c| fold(c) == fold(&option)) {
                return Err(QuestionError::DuplicateCandidate(option));
            }
            candidates.push(option);
        }
        candidates.push(OTHER.to_string());
        if !(MIN_CANDIDATES..=MAX_CANDIDATES).contains(&candidates.len()) {
            return Err(QuestionError::CandidateCount(candidates.len()));
        }
        Ok(ClarificationQuestion { facet, text, candidates })
    }

    /// Candidates other than the trailing "Other".
    pub fn options(&self) -> &[String] {
        &self.candidates[..self.candidates.len().saturating_sub(1)]
    }

    /// Identity used for repeat detection: facet plus folded option set.
    pub fn key(&self) -> (Option<FacetId>, BTreeSet<String>) {
        (self.facet, self.options().iter().map(|o| fold(o)).collect())
    }

    /// Case-insensitive candidate lookup returning the canonical spelling.
    pub fn find_candidate(&self, text: &str) -> Option<&str> {
        let key = fold(text);
        self.candidates.iter().find(|c| fold(c) == key).map(String::as_str)
    }

    pub fn validate(&self) -> Result<(), QuestionError> {
        let rebuilt = ClarificationQuestion::new(self.facet, self.text.clone(), self.options().to_vec())?;
        if rebuilt.candidates != self.candidates {
            return Err(QuestionError::CandidateCount(self.candidates.len()));
        }
        Ok(())
    }
}

/// One answered question, as stored in memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandRecord {
    /// Agent turn that asked the question.
    pub turn: usize,
    pub facet: Option<FacetId>,
    pub question_text: String,
    pub chosen_options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<String>,
}

impl DemandRecord {
    /// Chosen options except "Other".
    pub fn concrete_options(&self) -> impl Iterator<Item = &str> + '_ {
        self.chosen_options.iter().map(String::as_str).filter(|o| !is_other(o))
    }

    /// True when the answer places no constraint on the facet.
    pub fn is_unconstrained(&self) -> bool {
        self.concrete_options().next().is_none() && self.free_text.is_none()
    }
}

/// A user's reply to one question: picked candidates and/or free text.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Answer {
    #[serde(default)]
    pub selected: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<String>,
}

impl Answer {
    pub fn select<S: Into<String>>(options: impl IntoIterator<Item = S>) -> Self {
        Answer { selected: options.into_iter().map(Into::into).collect(), free_text: None }
    }

    pub fn text(text: impl Into<String>) -> Self {
        Answer { selected: Vec::new(), free_text: Some(text.into()) }
    }

    pub fn other() -> Self {
        Answer::select([OTHER])
    }
}

/// What the agent returns after each turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnOutput {
    pub turn: usize,
    /// Natural-language query used for item search.
    pub query: String,
    pub questions: Vec<ClarificationQuestion>,
    pub items: RankedList,
    /// No further question could be generated; the session can only
    /// return items from here on.
    #[serde(default)]
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Category {
        category: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        query: Option<String>,
    },
    Answers { answers: Vec<Answer> },
    Turn(TurnOutput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub turn: usize,
    pub role: Role,
    pub payload: Payload,
}

/// One line of an exported transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub session_id: String,
    pub turn: usize,
    pub role: Role,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounters {
    /// Structured queries attempted (one per analysis turn under the
    /// structured statistics source).
    pub structured_attempts: usize,
    /// Model-written queries the restricted grammar rejected.
    pub invalid_query: usize,
    /// Structured queries that executed but matched nothing.
    pub trivial_query: usize,
}

/// Everything the agent remembers about one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMemory {
    pub session_id: String,
    /// Seed for any sampling done on behalf of this session.
    pub seed: u64,
    pub category: Option<String>,
    /// First user utterance when it is a full query rather than a category.
    pub initial_query: Option<String>,
    pub demands: Vec<DemandRecord>,
    pub asked_questions: Vec<(usize, ClarificationQuestion)>,
    pub pending_questions: Vec<ClarificationQuestion>,
    pub dialogue_log: Vec<Utterance>,
    pub search_history: Vec<Vec<String>>,
    #[serde(skip)]
    pub stats_history: Vec<CategoryStatistics>,
    pub counters: FailureCounters,
}

impl SessionMemory {
    pub fn new(session_id: impl Into<String>, seed: u64) -> Self {
        SessionMemory {
            session_id: session_id.into(),
            seed,
            category: None,
            initial_query: None,
            demands: Vec::new(),
            asked_questions: Vec::new(),
            pending_questions: Vec::new(),
            dialogue_log: Vec::new(),
            search_history: Vec::new(),
            stats_history: Vec::new(),
            counters: FailureCounters::default(),
        }
    }

    /// Completed agent turns.
    pub fn agent_turns(&self) -> usize {
        self.search_history.len()
    }

    /// Agent outputs in turn order.
    pub fn turn_outputs(&self) -> impl Iterator<Item = &TurnOutput> + '_ {
        self.dialogue_log.iter().filter_map(|u| match &u.payload {
            Payload::Turn(t) => Some(t),
            _ => None,
        })
    }

    /// Checks the alternation and history-length invariants.
    pub fn check(&self) -> Result<(), String> {
        for (i, u) in self.dialogue_log.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Agent };
            if u.role != expected {
                return Err(format!("utterance {i} has role {:?}", u.role));
            }
        }
        let agent = self.dialogue_log.iter().filter(|u| u.role == Role::Agent).count();
        if agent != self.search_history.len() {
            return Err(format!("{agent} agent turns but {} search records", self.search_history.len()));
        }
        Ok(())
    }

    pub fn transcript(&self) -> Vec<TranscriptRecord> {
        self.dialogue_log
            .iter()
            .map(|u| TranscriptRecord {
                session_id: self.session_id.clone(),
                turn: u.turn,
                role: u.role,
                payload: u.payload.clone(),
            })
            .collect()
    }

    /// Writes the transcript as line-delimited JSON.
    pub fn write_transcript<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.transcript() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
