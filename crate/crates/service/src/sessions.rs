//! In-memory dialogue sessions over a shared [`Agent`].

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use prodclarify_core::agent::{Agent, AgentError, Answer, DemandRecord, SessionMemory, TurnOutput, UserInput};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    AwaitingCategory,
    AwaitingAnswers,
    Closed,
}

/// Snapshot returned by every session endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResource {
    pub session_id: String,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Latest agent turn; absent before the category is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn: Option<TurnOutput>,
    pub demands: Vec<DemandRecord>,
}

/// One entry of an answers request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerInput {
    pub question_index: usize,
    #[serde(default)]
    pub selected: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown category `{category}`")]
    UnknownCategory { category: String, available: Vec<String> },
    #[error("no session `{0}`")]
    SessionNotFound(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Conflict(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<AgentError> for ServiceError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::UnknownCategory { category, available } => ServiceError::UnknownCategory { category, available },
            AgentError::AnswerCountMismatch { .. } => ServiceError::Validation(e.to_string()),
            AgentError::AlreadyStarted | AgentError::NotStarted | AgentError::NoPendingQuestions => {
                ServiceError::Conflict(e.to_string())
            }
            AgentError::NoAskableFacet | AgentError::Internal(_) => ServiceError::Internal(e.to_string()),
        }
    }
}

/// Turns request answers into agent answers in question order.
pub fn convert_answers(turn: &TurnOutput, mut answers: Vec<AnswerInput>) -> Result<Vec<Answer>, ServiceError> {
    let expected = turn.questions.len();
    if answers.len() != expected {
        return Err(ServiceError::Validation(format!("expected {expected} answers, got {}", answers.len())));
    }
    let indices: BTreeSet<usize> = answers.iter().map(|a| a.question_index).collect();
    if indices.len() != expected || indices.iter().any(|&i| i >= expected) {
        return Err(ServiceError::Validation(format!("question_index values must be 0..{expected}, each once")));
    }
    answers.sort_by_key(|a| a.question_index);
    answers
        .into_iter()
        .map(|a| {
            let question = &turn.questions[a.question_index];
            if let Some(bad) = a.selected.iter().find(|s| question.find_candidate(s).is_none()) {
                return Err(ServiceError::Validation(format!(
                    "`{bad}` is not a candidate of question {}",
                    a.question_index
                )));
            }
            let free_text = a.free_text.filter(|t| !t.trim().is_empty());
            if a.selected.is_empty() && free_text.is_none() {
                return Err(ServiceError::Validation(format!(
                    "question {} needs a selection or free text",
                    a.question_index
                )));
            }
            Ok(Answer { selected: a.selected, free_text })
        })
        .collect()
}

/// One session's state machine.
#[derive(Debug, Clone)]
pub struct Session {
    pub memory: SessionMemory,
    pub state: SessionState,
    last: Option<TurnOutput>,
    touched: Instant,
}

impl Session {
    pub fn new(memory: SessionMemory) -> Self {
        Session { memory, state: SessionState::AwaitingCategory, last: None, touched: Instant::now() }
    }

    fn after_turn(&mut self, out: TurnOutput) {
        self.state = if out.exhausted { SessionState::Closed } else { SessionState::AwaitingAnswers };
        self.last = Some(out);
    }

    pub fn start(&mut self, agent: &Agent, category: String, query: Option<String>) -> Result<(), ServiceError> {
        if self.state != SessionState::AwaitingCategory {
            return Err(ServiceError::Conflict("session already has a category".into()));
        }
        let out = agent.step(&mut self.memory, UserInput::Start { category, query })?;
        self.after_turn(out);
        Ok(())
    }

    /// Answers the latest questions. `turn`, when given, must name the
    /// latest turn; a stale value is rejected as a conflict.
    pub fn answer(&mut self, agent: &Agent, answers: Vec<AnswerInput>, turn: Option<usize>) -> Result<(), ServiceError> {
        match self.state {
            SessionState::AwaitingAnswers => {}
            SessionState::Closed => return Err(ServiceError::Conflict("session is closed".into())),
            SessionState::AwaitingCategory => return Err(ServiceError::Conflict("session has no category yet".into())),
        }
        let last = self.last.as_ref().ok_or_else(|| ServiceError::Internal("no turn recorded".into()))?;
        if let Some(t) = turn.filter(|&t| t != last.turn) {
            return Err(ServiceError::Conflict(format!("answers are for turn {t}, latest turn is {}", last.turn)));
        }
        let answers = convert_answers(last, answers)?;
        let out = agent.step(&mut self.memory, UserInput::Answers(answers))?;
        self.after_turn(out);
        Ok(())
    }

    pub fn close(&mut self) {
        self.state = SessionState::Closed;
    }

    pub fn resource(&self) -> SessionResource {
        SessionResource {
            session_id: self.memory.session_id.clone(),
            state: self.state,
            category: self.memory.category.clone(),
            turn: self.last.clone(),
            demands: self.memory.demands.clone(),
        }
    }
}

type Slot = Arc<tokio::sync::Mutex<Session>>;

/// Live sessions. Each session has its own lock, so requests to one
/// session run one at a time while distinct sessions proceed in parallel.
pub struct SessionStore {
    agent: Arc<Agent>,
    sessions: Mutex<HashMap<String, Slot>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(agent: Arc<Agent>, ttl: Duration) -> Self {
        SessionStore { agent, sessions: Mutex::new(HashMap::new()), ttl }
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, id: &str) -> Result<Slot, ServiceError> {
        self.sessions.lock().expect("session map").get(id).cloned().ok_or_else(|| ServiceError::SessionNotFound(id.into()))
    }

    /// Locks a live session, dropping it if it has idled past the TTL.
    async fn lock(&self, id: &str) -> Result<tokio::sync::OwnedMutexGuard<Session>, ServiceError> {
        let mut guard = self.slot(id)?.lock_owned().await;
        if guard.touched.elapsed() > self.ttl {
            self.sessions.lock().expect("session map").remove(id);
            return Err(ServiceError::SessionNotFound(id.into()));
        }
        guard.touched = Instant::now();
        Ok(guard)
    }

    async fn blocking<T: Send + 'static>(
        &self,
        mut guard: tokio::sync::OwnedMutexGuard<Session>,
        f: impl FnOnce(&Agent, &mut Session) -> Result<T, ServiceError> + Send + 'static,
    ) -> Result<(tokio::sync::OwnedMutexGuard<Session>, T), ServiceError> {
        let agent = Arc::clone(&self.agent);
        tokio::task::spawn_blocking(move || {
            let r = f(&agent, &mut guard);
            r.map(|v| (guard, v))
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
    }

    /// Creates a session; with a category it also runs the first turn. An
    /// unknown category creates nothing.
    pub async fn create(&self, category: Option<String>, query: Option<String>) -> Result<SessionResource, ServiceError> {
        let id = uuid::Uuid::new_v4().to_string();
        let session = Session::new(self.agent.open_session(id.clone()));
        let slot: Slot = Arc::new(tokio::sync::Mutex::new(session));
        let guard = Arc::clone(&slot).lock_owned().await;
        let (guard, ()) = match category {
            Some(c) => self.blocking(guard, move |agent, s| s.start(agent, c, query)).await?,
            None => (guard, ()),
        };
        let resource = guard.resource();
        drop(guard);
        self.sessions.lock().expect("session map").insert(id, slot);
        Ok(resource)
    }

    pub async fn start(&self, id: &str, category: String, query: Option<String>) -> Result<SessionResource, ServiceError> {
        let guard = self.lock(id).await?;
        let (guard, ()) = self.blocking(guard, move |agent, s| s.start(agent, category, query)).await?;
        Ok(guard.resource())
    }

    pub async fn get(&self, id: &str) -> Result<SessionResource, ServiceError> {
        Ok(self.lock(id).await?.resource())
    }

    pub async fn answer(
        &self,
        id: &str,
        answers: Vec<AnswerInput>,
        turn: Option<usize>,
    ) -> Result<SessionResource, ServiceError> {
        let guard = self.lock(id).await?;
        let (guard, ()) = self.blocking(guard, move |agent, s| s.answer(agent, answers, turn)).await?;
        Ok(guard.resource())
    }

    /// Closes a session; closing it again returns the same snapshot.
    pub async fn close(&self, id: &str) -> Result<SessionResource, ServiceError> {
        let mut guard = self.lock(id).await?;
        guard.close();
        Ok(guard.resource())
    }

    /// Full memory of a session, for transcript export.
    pub async fn memory(&self, id: &str) -> Result<SessionMemory, ServiceError> {
        Ok(self.lock(id).await?.memory.clone())
    }

    /// Drops sessions idle longer than the TTL; busy sessions are kept.
    /// Returns how many were removed.
    pub fn sweep(&self) -> usize {
        let mut map = self.sessions.lock().expect("session map");
        let before = map.len();
        let ttl = self.ttl;
        map.retain(|_, slot| match slot.try_lock() {
            Ok(s) => s.touched.elapsed() <= ttl,
            Err(_) => true,
        });
        before - map.len()
    }
}
