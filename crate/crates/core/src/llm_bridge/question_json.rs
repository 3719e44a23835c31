use serde::Deserialize;

use crate::agent::ClarificationQuestion;
use crate::catalog::FacetId;

use super::BridgeFailure;

const MAX_OPTIONS: usize = 5;

#[derive(Debug, Deserialize)]
struct RawQuestion {
    #[serde(default)]
    facet: Option<String>,
    #[serde(alias = "text")]
    question: String,
    #[serde(alias = "options")]
    candidates: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPayload {
    List(Vec<RawQuestion>),
    Wrapped { questions: Vec<RawQuestion> },
}

/// JSON candidates in a reply: text before the first fence (a reply that
/// continues the fence the question prompt opens) and the first fenced body.
fn fenced_bodies(text: &str) -> Vec<&str> {
    let Some(start) = text.find("```") else { return Vec::new() };
    let mut out = Vec::new();
    if !text[..start].trim().is_empty() {
        out.push(&text[..start]);
    }
    let after = &text[start + 3..];
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
    let body = &after[body_start..];
    out.push(body.find("```").map(|end| &body[..end]).unwrap_or(body));
    out
}

/// Extracts questions from a model reply.
///
/// The payload is a JSON array of `{facet, question, candidates}` objects
/// (or an object with a `questions` array) in a fenced block. Candidates
/// are trimmed to five and "Other" is appended.
pub fn parse_question_json(text: &str) -> Result<Vec<ClarificationQuestion>, BridgeFailure> {
    let bodies = fenced_bodies(text);
    if bodies.is_empty() {
        return Err(BridgeFailure::Malformed("no fenced JSON block".into()));
    }
    let mut last_err = String::new();
    let mut parsed = None;
    for body in bodies {
        match serde_json::from_str::<RawPayload>(body.trim()) {
            Ok(p) => {
                parsed = Some(p);
                break;
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    let raw = match parsed {
        Some(RawPayload::List(v)) => v,
        Some(RawPayload::Wrapped { questions }) => questions,
        None => return Err(BridgeFailure::Malformed(format!("bad JSON: {last_err}"))),
    };
    if raw.is_empty() {
        return Err(BridgeFailure::Malformed("no questions".into()));
    }
    raw.into_iter()
        .map(|rq| {
            let facet = match rq.facet.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(name) => {
                    Some(name.parse::<FacetId>().map_err(|e| BridgeFailure::Malformed(e.to_string()))?)
                }
            };
            let options: Vec<String> = rq
                .candidates
                .into_iter()
                .filter(|c| !crate::agent::is_other(c) && !c.trim().is_empty())
                .take(MAX_OPTIONS)
                .collect();
            ClarificationQuestion::new(facet, rq.question, options).map_err(|e| BridgeFailure::Malformed(e.to_string()))
        })
        .collect()
}
