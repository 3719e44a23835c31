use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::StatsSource;
use crate::catalog::{generate_synthetic_catalog, load_catalog, Catalog, SyntheticSpec};
use crate::retrieval::RetrieverKind;

use super::doc2query::Doc2QueryMode;
use super::simulator::{MatchPolicy, DEFAULT_THETA};
use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// One synthesized query per document, no dialogue.
    Traditional,
    /// Dialogue starting from the bare category.
    #[default]
    Conversational,
    /// Dialogue starting from a synthesized query.
    WarmStart,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Traditional => "traditional",
            Setting::Conversational => "conversational",
            Setting::WarmStart => "warm_start",
        }
    }

    pub fn is_conversational(self) -> bool {
        self != Setting::Traditional
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generated catalog used when neither `synthetic` nor `path` is given.
pub const DEFAULT_SYNTHETIC: &str = "4x500x8";

/// Where the benchmark catalog comes from: a generated one or a JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogSource {
    /// `CxIxV`: categories, items per category, values per facet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<String>,
    /// Generator seed; the benchmark seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl CatalogSource {
    /// Loads or generates the catalog. Relative paths resolve against
    /// `base_dir`.
    pub fn load(&self, default_seed: u64, base_dir: Option<&Path>) -> Result<Catalog, BenchError> {
        match (self.synthetic.as_deref(), &self.path) {
            (None, None) => CatalogSource { synthetic: Some(DEFAULT_SYNTHETIC.into()), ..self.clone() }.load(default_seed, base_dir),
            (Some(s), None) => {
                let spec: SyntheticSpec = s.parse().map_err(|e| BenchError::Spec(format!("catalog.synthetic: {e}")))?;
                Ok(generate_synthetic_catalog(self.synthetic_seed.unwrap_or(default_seed), spec)?)
            }
            (None, Some(p)) => {
                let p = match base_dir {
                    Some(base) if p.is_relative() => base.join(p),
                    _ => p.clone(),
                };
                Ok(load_catalog(p)?)
            }
            _ => Err(BenchError::Spec("catalog needs exactly one of `synthetic` or `path`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    pub n: usize,
    pub k: usize,
    pub max_number: usize,
    pub top_m: usize,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams { n: 3, k: 10, max_number: 100, top_m: crate::catalog::DEFAULT_TOP_M }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    #[default]
    Exact,
    TokenOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorParams {
    pub matching: Matching,
    /// Threshold for token-overlap matching.
    pub theta: f64,
    pub free_text: bool,
}

impl Default for SimulatorParams {
    fn default() -> Self {
        SimulatorParams { matching: Matching::Exact, theta: DEFAULT_THETA, free_text: false }
    }
}

impl SimulatorParams {
    pub fn policy(&self) -> MatchPolicy {
        match self.matching {
            Matching::Exact => MatchPolicy::Exact,
            Matching::TokenOverlap => MatchPolicy::TokenOverlap { theta: self.theta },
        }
    }
}

/// A benchmark run description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub setting: Setting,
    /// Ground-truth documents sampled from every category.
    pub docs_per_category: usize,
    /// User turns per dialogue.
    pub turns: usize,
    pub retrievers: Vec<RetrieverKind>,
    /// Also report metrics after reranking.
    pub rerank: bool,
    pub stats_source: StatsSource,
    pub seed: u64,
    pub doc2query: Doc2QueryMode,
    pub catalog: CatalogSource,
    pub agent: AgentParams,
    pub simulator: SimulatorParams,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            setting: Setting::Conversational,
            docs_per_category: 100,
            turns: 5,
            retrievers: vec![RetrieverKind::Bm25],
            rerank: false,
            stats_source: StatsSource::Structured,
            seed: 0,
            doc2query: Doc2QueryMode::Template,
            catalog: CatalogSource::default(),
            agent: AgentParams::default(),
            simulator: SimulatorParams::default(),
        }
    }
}

impl BenchmarkSpec {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let spec: BenchmarkSpec = toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| BenchError::Spec(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |m: &str| Err(BenchError::Spec(m.to_string()));
        if self.turns == 0 {
            return fail("turns must be at least 1");
        }
        if self.docs_per_category == 0 {
            return fail("docs_per_category must be at least 1");
        }
        if self.retrievers.is_empty() {
            return fail("at least one retriever is required");
        }
        if self.agent.n == 0 || self.agent.k == 0 || self.agent.max_number == 0 || self.agent.top_m == 0 {
            return fail("agent parameters must be positive");
        }
        if !(0.0..=1.0).contains(&self.simulator.theta) {
            return fail("simulator.theta must lie in [0, 1]");
        }
        Ok(())
    }
}
