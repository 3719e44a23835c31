//! Simulated-user benchmark: sample ground-truth documents, let a
//! deterministic shopper talk to the agent, and score every turn's results.

mod analysis;
mod doc2query;
mod metrics;
mod report;
mod runner;
mod simulator;
mod spec;

use std::path::Path;
use std::sync::Arc;

pub use analysis::{
    aspect_distribution, failure_rates, max_similarities, question_signature, question_similarity, FREE_FORM,
};
pub use doc2query::{doc2query, template_query, Doc2QueryMode};
pub use metrics::{hit_at_k, mrr_at_k, METRIC_K};
pub use report::{BenchmarkReport, RunReport, SIMILARITY_MEASURE};
pub use runner::{
    run_conversational, run_conversational_detailed, run_session, run_traditional, sample_truths, session_seed,
    SessionOutcome,
};
pub use simulator::{MatchPolicy, SimulatedUser, DEFAULT_THETA};
pub use spec::{AgentParams, BenchmarkSpec, CatalogSource, Matching, Setting, SimulatorParams, DEFAULT_SYNTHETIC};

use crate::catalog::{Catalog, CatalogError};
use crate::llm_bridge::LlmBridge;
use crate::retrieval::{RetrievalError, SearchEngine};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    Spec(String),
    #[error("category `{category}` has {available} documents, {requested} requested")]
    NotEnoughDocs { category: String, available: usize, requested: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Runs `spec` on an already loaded catalog.
pub fn run_benchmark(
    catalog: Arc<Catalog>,
    spec: &BenchmarkSpec,
    bridge: Option<Arc<LlmBridge>>,
) -> Result<BenchmarkReport, BenchError> {
    let engine = Arc::new(SearchEngine::from_catalog(&catalog)?);
    match spec.setting {
        Setting::Traditional => run_traditional(&catalog, &engine, spec, bridge.as_deref()),
        _ => run_conversational(catalog, engine, spec, bridge),
    }
}

/// Loads the spec's catalog and runs it.
pub fn bench(spec: &BenchmarkSpec, base_dir: Option<&Path>) -> Result<BenchmarkReport, BenchError> {
    spec.validate()?;
    let catalog = spec.catalog.load(spec.seed, base_dir)?;
    run_benchmark(Arc::new(catalog), spec, None)
}
