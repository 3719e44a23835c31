//! Full-text and dense retrieval over product documents, rank fusion, and
//! reranking.

mod bm25;
mod dense;
mod embed;
mod fusion;
mod ranked;
mod rerank;
mod tokenize;

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, FacetId, ProductItem};

pub use bm25::{Bm25Index, Bm25Params};
pub use dense::{cosine, DenseIndex};
pub use embed::{feature_hash_embed, Embedder, HashEmbedder, DEFAULT_DIMENSION};
pub use fusion::{rrf_fuse, DEFAULT_RRF_K};
pub use ranked::{rank_order, RankedList, ScoredDoc};
pub use rerank::{rerank, DocumentSource, Reranker, TokenOverlapReranker};
pub use tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RetrievalError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
    #[error("vector dimension mismatch: index has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("document {0} has a non-finite embedding")]
    NonFinite(String),
}

/// Indexed text of an item: title, category, then each facet's values in
/// canonical facet order, space-separated.
pub fn item_to_document_text(item: &ProductItem) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if !item.title.is_empty() {
        parts.push(&item.title);
    }
    parts.push(&item.category);
    for facet in FacetId::LIST {
        parts.extend(item.values(facet).iter().map(String::as_str));
    }
    parts.join(" ")
}

impl DocumentSource for Catalog {
    fn document_text(&self, id: &str) -> Option<Cow<'_, str>> {
        self.get(id).map(|item| Cow::Owned(item_to_document_text(item)))
    }
}

/// Which retriever answers natural-language queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RetrieverKind {
    #[default]
    Bm25,
    Dense,
    /// BM25 and dense lists merged by reciprocal rank fusion.
    Fusion,
}

impl RetrieverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RetrieverKind::Bm25 => "bm25",
            RetrieverKind::Dense => "dense",
            RetrieverKind::Fusion => "fusion",
        }
    }
}

impl fmt::Display for RetrieverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetrieverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bm25" => Ok(RetrieverKind::Bm25),
            "dense" => Ok(RetrieverKind::Dense),
            "fusion" | "bm25+dense" => Ok(RetrieverKind::Fusion),
            other => Err(format!("unknown retriever `{other}`")),
        }
    }
}

/// Fusion tuning shared by every search through the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    pub k_const: f64,
    /// Depth each input list is retrieved to before fusing.
    pub depth: usize,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams { k_const: DEFAULT_RRF_K, depth: 100 }
    }
}

/// BM25 and dense indexes over one catalog, with the embedder and reranker
/// used to query them. Immutable once built; share it behind an `Arc`.
pub struct SearchEngine {
    bm25: Bm25Index,
    dense: DenseIndex,
    embedder: Arc<dyn Embedder>,
    reranker: Arc<dyn Reranker>,
    texts: HashMap<String, String>,
    fusion: FusionParams,
}

impl fmt::Debug for SearchEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchEngine")
            .field("docs", &self.texts.len())
            .field("dimension", &self.dense.dimension())
            .field("fusion", &self.fusion)
            .finish()
    }
}

impl SearchEngine {
    /// Engine with the default hash embedder and token-overlap reranker.
    pub fn from_catalog(catalog: &Catalog) -> Result<Self, RetrievalError> {
        Self::with_models(catalog, Arc::new(HashEmbedder::default()), Arc::new(TokenOverlapReranker))
    }

    pub fn with_models(
        catalog: &Catalog,
        embedder: Arc<dyn Embedder>,
        reranker: Arc<dyn Reranker>,
    ) -> Result<Self, RetrievalError> {
        let docs: Vec<(String, String)> =
            catalog.items().iter().map(|item| (item.id.clone(), item_to_document_text(item))).collect();
        let bm25 = Bm25Index::build(docs.iter().map(|(id, t)| (id.clone(), t.as_str())))?;
        let dense = DenseIndex::build(docs.iter().map(|(id, t)| (id.clone(), t.as_str())), embedder.as_ref())?;
        Ok(SearchEngine { bm25, dense, embedder, reranker, texts: docs.into_iter().collect(), fusion: FusionParams::default() })
    }

    pub fn with_fusion(mut self, fusion: FusionParams) -> Self {
        self.fusion = fusion;
        self
    }

    pub fn bm25(&self) -> &Bm25Index {
        &self.bm25
    }

    pub fn dense(&self) -> &DenseIndex {
        &self.dense
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    pub fn search(&self, query: &str, kind: RetrieverKind, k: usize) -> RankedList {
        match kind {
            RetrieverKind::Bm25 => self.bm25.search(query, k),
            RetrieverKind::Dense => self.dense_search(query, k),
            RetrieverKind::Fusion => {
                let depth = self.fusion.depth.max(k);
                let lists = [self.bm25.search(query, depth), self.dense_search(query, depth)];
                rrf_fuse(&lists, self.fusion.k_const, k)
            }
        }
    }

    fn dense_search(&self, query: &str, k: usize) -> RankedList {
        self.dense
            .search(query, k, self.embedder.as_ref())
            .expect("dense index was built with this engine's embedder")
    }

    /// Reranks the first `k` candidates with the engine's reranker.
    pub fn rerank(&self, query: &str, candidates: &RankedList, k: usize) -> RankedList {
        rerank(query, candidates, self.reranker.as_ref(), self, k)
    }
}

impl DocumentSource for SearchEngine {
    fn document_text(&self, id: &str) -> Option<Cow<'_, str>> {
        self.texts.get(id).map(|s| Cow::Borrowed(s.as_str()))
    }
}
