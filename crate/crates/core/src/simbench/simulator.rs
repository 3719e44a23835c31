use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::agent::{Answer, ClarificationQuestion, OTHER};
use crate::catalog::{fold, FacetId, ProductItem};
use crate::retrieval::tokenize;

pub const DEFAULT_THETA: f64 = 0.5;

/// How a candidate is compared with the ground-truth item's values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum MatchPolicy {
    /// Equal after trimming and lowercasing.
    #[default]
    Exact,
    /// Share of the candidate's tokens found in the value is at least `theta`.
    TokenOverlap { theta: f64 },
}

impl MatchPolicy {
    pub fn matches(self, candidate: &str, value: &str) -> bool {
        match self {
            MatchPolicy::Exact => fold(candidate) == fold(value),
            MatchPolicy::TokenOverlap { theta } => {
                let c: BTreeSet<String> = tokenize(candidate).into_iter().collect();
                if c.is_empty() {
                    return false;
                }
                let v: BTreeSet<String> = tokenize(value).into_iter().collect();
                c.intersection(&v).count() as f64 / c.len() as f64 >= theta
            }
        }
    }
}

/// Answers clarification questions on behalf of a shopper who wants
/// `truth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedUser {
    pub truth: ProductItem,
    pub policy: MatchPolicy,
    /// When no candidate matches, also state the item's own values as free
    /// text instead of a bare "Other".
    pub emit_free_text: bool,
}

impl SimulatedUser {
    pub fn new(truth: ProductItem) -> Self {
        SimulatedUser { truth, policy: MatchPolicy::Exact, emit_free_text: false }
    }

    pub fn with_policy(mut self, policy: MatchPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_free_text(mut self, on: bool) -> Self {
        self.emit_free_text = on;
        self
    }

    fn relevant_values(&self, facet: Option<FacetId>) -> Vec<&str> {
        match facet {
            Some(f) => self.truth.values(f).iter().map(String::as_str).collect(),
            None => FacetId::ALL.iter().flat_map(|&f| self.truth.values(f)).map(String::as_str).collect(),
        }
    }

    /// Every candidate matching one of the item's values for the question's
    /// facet (all facets when it has none), or "Other".
    pub fn answer(&self, question: &ClarificationQuestion) -> Answer {
        let values = self.relevant_values(question.facet);
        let picked: Vec<String> = question
            .options()
            .iter()
            .filter(|c| values.iter().any(|v| self.policy.matches(c, v)))
            .cloned()
            .collect();
        if !picked.is_empty() {
            return Answer::select(picked);
        }
        if self.emit_free_text && !values.is_empty() {
            return Answer { selected: vec![OTHER.to_string()], free_text: Some(values.join(", ")) };
        }
        Answer::other()
    }

    pub fn simulate_answer(&self, questions: &[ClarificationQuestion]) -> Vec<Answer> {
        questions.iter().map(|q| self.answer(q)).collect()
    }
}
