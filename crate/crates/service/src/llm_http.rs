//! Chat-completions backend for OpenAI-compatible HTTP endpoints.

use std::time::Duration;

use prodclarify_core::llm_bridge::{BackendError, BackendSettings, ChatBackend, DEFAULT_TIMEOUT};
use serde_json::{json, Value};

/// Posts each prompt as a single user message to `settings.endpoint` and
/// returns `choices[0].message.content`.
pub struct HttpChatBackend {
    settings: BackendSettings,
    agent: ureq::Agent,
}

impl HttpChatBackend {
    pub fn new(settings: BackendSettings) -> Self {
        Self::with_timeout(settings, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(settings: BackendSettings, timeout: Duration) -> Self {
        HttpChatBackend { settings, agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }

    fn body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        });
        if let Some(model) = &self.settings.model {
            body["model"] = json!(model);
        }
        body
    }
}

fn content(reply: &Value) -> Option<&str> {
    reply.pointer("/choices/0/message/content").and_then(Value::as_str)
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let mut req = self.agent.post(&self.settings.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.settings.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let reply: Value = match req.send_json(self.body(prompt)) {
            Ok(r) => r.into_json().map_err(|e| BackendError::Failed(format!("unreadable reply: {e}")))?,
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(BackendError::Failed(format!("HTTP {code}: {}", text.chars().take(200).collect::<String>())));
            }
            Err(e) => return Err(BackendError::Failed(e.to_string())),
        };
        content(&reply)
            .map(String::from)
            .ok_or_else(|| BackendError::Failed("reply has no choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_body_shape() {
        let settings = BackendSettings { endpoint: "http://x".into(), api_key: None, model: Some("m1".into()) };
        let body = HttpChatBackend::new(settings).body("hi");
        assert_eq!(body["model"], "m1");
        assert_eq!(body["messages"][0]["content"], "hi");
        let bare = HttpChatBackend::new(BackendSettings { endpoint: "http://x".into(), api_key: None, model: None });
        assert!(bare.body("hi").get("model").is_none());
    }

    #[test]
    fn reply_content() {
        assert_eq!(content(&json!({"choices": [{"message": {"content": "ok"}}]})), Some("ok"));
        assert_eq!(content(&json!({"choices": []})), None);
    }

    #[test]
    fn unreachable_endpoint_fails() {
        let settings = BackendSettings { endpoint: "http://127.0.0.1:9/v1".into(), api_key: None, model: None };
        let backend = HttpChatBackend::with_timeout(settings, Duration::from_secs(2));
        assert!(matches!(backend.complete("p"), Err(BackendError::Failed(_))));
    }
}
