use std::collections::BTreeMap;

use crate::agent::{ClarificationQuestion, FailureCounters};
use crate::catalog::FacetId;
use crate::retrieval::{cosine, Embedder};

/// Text compared when measuring question similarity.
pub fn question_signature(q: &ClarificationQuestion) -> String {
    format!("{} {}", q.text, q.candidates.join(" "))
}

/// For every turn after the first, each question's highest cosine (floored
/// at 0) against all questions of earlier turns.
pub fn max_similarities(turns: &[Vec<String>], embedder: &dyn Embedder) -> Vec<Vec<f64>> {
    let vectors: Vec<Vec<Vec<f32>>> =
        turns.iter().map(|qs| qs.iter().map(|q| embedder.embed(q)).collect()).collect();
    (1..vectors.len())
        .map(|t| {
            vectors[t]
                .iter()
                .map(|v| {
                    vectors[..t].iter().flatten().map(|e| cosine(v, e).clamp(0.0, 1.0)).fold(0.0, f64::max)
                })
                .collect()
        })
        .collect()
}

/// Per-turn mean of [`max_similarities`]; turns without questions score 0.
/// Empty for fewer than two turns.
pub fn question_similarity(turns: &[Vec<String>], embedder: &dyn Embedder) -> Vec<f64> {
    max_similarities(turns, embedder).iter().map(|s| mean(s)).collect()
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Label used for questions without a facet.
pub const FREE_FORM: &str = "free_form";

/// Share of questions per facet. Empty input gives an empty map.
pub fn aspect_distribution<'a>(facets: impl IntoIterator<Item = &'a Option<FacetId>>) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for f in facets {
        *counts.entry(f.map(|f| f.as_str().to_string()).unwrap_or_else(|| FREE_FORM.into())).or_default() += 1;
        total += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

/// Invalid and trivial shares of all structured-query attempts; 0 when no
/// attempt was made.
pub fn failure_rates<'a>(counters: impl IntoIterator<Item = &'a FailureCounters>) -> (f64, f64) {
    let (mut attempts, mut invalid, mut trivial) = (0usize, 0usize, 0usize);
    for c in counters {
        attempts += c.structured_attempts;
        invalid += c.invalid_query;
        trivial += c.trivial_query;
    }
    if attempts == 0 {
        (0.0, 0.0)
    } else {
        (invalid as f64 / attempts as f64, trivial as f64 / attempts as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::HashEmbedder;

    #[test]
    fn identical_questions_are_fully_similar() {
        let e = HashEmbedder::new(256);
        let q = "Which color do you want? Red Blue Other".to_string();
        let sim = question_similarity(&[vec![q.clone()], vec![q]], &e);
        assert_eq!(sim.len(), 1);
        assert!((sim[0] - 1.0).abs() < 1e-6);
        assert!(question_similarity(&[vec!["x".into()]], &e).is_empty());
    }

    #[test]
    fn aspect_counting() {
        let d = aspect_distribution(&[Some(FacetId::Color), Some(FacetId::Color), Some(FacetId::Style)]);
        assert_eq!(d["color"], 2.0 / 3.0);
        assert_eq!(d["style"], 1.0 / 3.0);
        assert_eq!(aspect_distribution(&[None])[FREE_FORM], 1.0);
    }

    #[test]
    fn rates() {
        let c = FailureCounters { structured_attempts: 5, invalid_query: 0, trivial_query: 2 };
        assert_eq!(failure_rates([&c]), (0.0, 0.4));
        assert_eq!(failure_rates([]), (0.0, 0.0));
    }
}
