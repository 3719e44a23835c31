use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};

use super::ranked::RankedList;
use super::tokenize::tokenize;

/// Scores a (query, document) pair; higher is more relevant.
pub trait Reranker: Send + Sync {
    fn score(&self, query: &str, document: &str) -> f64;
}

/// Fraction of distinct query tokens present in the document.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenOverlapReranker;

impl Reranker for TokenOverlapReranker {
    fn score(&self, query: &str, document: &str) -> f64 {
        let q: BTreeSet<String> = tokenize(query).into_iter().collect();
        if q.is_empty() {
            return 0.0;
        }
        let d: BTreeSet<String> = tokenize(document).into_iter().collect();
        q.intersection(&d).count() as f64 / q.len() as f64
    }
}

/// Lookup of document text by id.
pub trait DocumentSource {
    fn document_text(&self, id: &str) -> Option<Cow<'_, str>>;
}

impl DocumentSource for HashMap<String, String> {
    fn document_text(&self, id: &str) -> Option<Cow<'_, str>> {
        self.get(id).map(|s| Cow::Borrowed(s.as_str()))
    }
}

/// Reorders the first `k` candidates by reranker score (ties by id). The
/// output holds exactly the same documents as `candidates.top(k)`.
/// Candidates without text score as empty documents.
pub fn rerank(
    query: &str,
    candidates: &RankedList,
    reranker: &dyn Reranker,
    docs: &dyn DocumentSource,
    k: usize,
) -> RankedList {
    let top = candidates.entries.iter().take(k);
    RankedList::from_scores(
        top.map(|e| {
            let text = docs.document_text(&e.id).unwrap_or(Cow::Borrowed(""));
            (e.id.clone(), reranker.score(query, &text))
        }),
        k,
    )
}
