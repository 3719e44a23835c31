use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

pub const ENDPOINT_VAR: &str = "PRODCLARIFY_LLM_ENDPOINT";
pub const API_KEY_VAR: &str = "PRODCLARIFY_LLM_API_KEY";
pub const MODEL_VAR: &str = "PRODCLARIFY_LLM_MODEL";

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_RETRIES: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend timed out after {0:?}")]
    Timeout(Duration),
    #[error("backend failed: {0}")]
    Failed(String),
}

/// Something that completes a rendered prompt.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

/// Adapts a closure into a backend.
pub struct FnBackend<F>(pub F);

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&str) -> Result<String, BackendError> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        (self.0)(prompt)
    }
}

/// Applies a per-call deadline and a retry budget to another backend.
///
/// Each attempt runs on its own thread; a caller waits at most `timeout`
/// per attempt. A timed-out attempt is abandoned, not cancelled.
#[derive(Clone)]
pub struct GuardedBackend {
    inner: Arc<dyn ChatBackend>,
    timeout: Duration,
    retries: usize,
}

impl GuardedBackend {
    pub fn new(inner: Arc<dyn ChatBackend>) -> Self {
        GuardedBackend { inner, timeout: DEFAULT_TIMEOUT, retries: DEFAULT_RETRIES }
    }

    pub fn with_policy(mut self, timeout: Duration, retries: usize) -> Self {
        self.timeout = timeout;
        self.retries = retries;
        self
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn retries(&self) -> usize {
        self.retries
    }

    fn attempt(&self, prompt: &str) -> Result<String, BackendError> {
        let (tx, rx) = mpsc::channel();
        let inner = Arc::clone(&self.inner);
        let prompt = prompt.to_string();
        thread::spawn(move || {
            let _ = tx.send(inner.complete(&prompt));
        });
        match rx.recv_timeout(self.timeout) {
            Ok(result) => result,
            Err(mpsc::RecvTimeoutError::Timeout) => Err(BackendError::Timeout(self.timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(BackendError::Failed("backend thread panicked".into())),
        }
    }
}

impl ChatBackend for GuardedBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let mut last = None;
        for _ in 0..=self.retries {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

/// Backend connection settings read from the environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendSettings {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
}

impl BackendSettings {
    /// `None` when no endpoint is configured.
    pub fn from_env() -> Option<Self> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Option<Self> {
        let nonempty = |k: &str| lookup(k).map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
        Some(BackendSettings { endpoint: nonempty(ENDPOINT_VAR)?, api_key: nonempty(API_KEY_VAR), model: nonempty(MODEL_VAR) })
    }
}
