use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::retrieval::RetrieverKind;

use super::spec::{BenchmarkSpec, Setting};

/// Name of the question-similarity measure recorded in reports.
pub const SIMILARITY_MEASURE: &str = "max cosine of hashed-feature embeddings against earlier-turn questions";

/// Results for one retriever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub retriever: RetrieverKind,
    /// Mean MRR@10 per turn (one entry for the traditional setting).
    pub mrr_at_10: Vec<f64>,
    pub hit_at_10: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerank_mrr_at_10: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerank_hit_at_10: Option<Vec<f64>>,
    /// Mean query length in tokens per turn.
    pub query_length: Vec<f64>,
    pub structured_attempts: usize,
    pub invalid_queries: usize,
    pub trivial_queries: usize,
    pub invalid_rate: f64,
    pub trivial_rate: f64,
    /// Sessions that ran out of questions before the last turn.
    pub exhausted_sessions: usize,
    /// Sessions stopped by an agent error; their last metrics carry forward.
    pub failed_sessions: usize,
    /// Per-turn similarity for turns 2..=T.
    pub question_similarity: Vec<f64>,
    /// Share of asked questions per facet.
    pub aspect_distribution: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn final_mrr(&self) -> f64 {
        self.mrr_at_10.last().copied().unwrap_or(0.0)
    }

    pub fn final_hit(&self) -> f64 {
        self.hit_at_10.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub setting: Setting,
    pub sessions: usize,
    pub turns: usize,
    pub similarity_measure: String,
    pub runs: Vec<RunReport>,
    pub config: BenchmarkSpec,
}

fn row(out: &mut String, label: &str, stage: &str, values: &[f64]) {
    let _ = write!(out, "{label:<8} {stage:<16}");
    for v in values {
        let _ = write!(out, " {:>7.2}", v * 100.0);
    }
    out.push('\n');
}

impl BenchmarkReport {
    pub fn run(&self, retriever: RetrieverKind) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.retriever == retriever)
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text tables: metrics per turn (scaled to percent), failure
    /// rates, and the question analyses.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "setting: {}  sessions: {}  turns: {}", self.setting, self.sessions, self.turns);
        let _ = write!(out, "\n{:<8} {:<16}", "model", "metric");
        for t in 1..=self.turns {
            let _ = write!(out, " {:>7}", format!("turn{t}"));
        }
        out.push('\n');
        for r in &self.runs {
            let name = r.retriever.as_str();
            row(&mut out, name, "MRR@10", &r.mrr_at_10);
            row(&mut out, name, "HIT@10", &r.hit_at_10);
            if let (Some(m), Some(h)) = (&r.rerank_mrr_at_10, &r.rerank_hit_at_10) {
                row(&mut out, name, "rerank MRR@10", m);
                row(&mut out, name, "rerank HIT@10", h);
            }
        }
        if self.setting.is_conversational() {
            let _ = writeln!(out, "\n{:<8} {:>9} {:>9} {:>9} {:>9}", "model", "attempts", "invalid%", "trivial%", "exhausted");
            for r in &self.runs {
                let _ = writeln!(
                    out,
                    "{:<8} {:>9} {:>9.2} {:>9.2} {:>9}",
                    r.retriever.as_str(),
                    r.structured_attempts,
                    r.invalid_rate * 100.0,
                    r.trivial_rate * 100.0,
                    r.exhausted_sessions
                );
            }
            for r in &self.runs {
                let _ = writeln!(out, "\n[{}] question similarity ({SIMILARITY_MEASURE}):", r.retriever.as_str());
                let curve: Vec<String> = r.question_similarity.iter().map(|v| format!("{v:.3}")).collect();
                let _ = writeln!(out, "  {}", curve.join(" "));
                let _ = writeln!(out, "[{}] question aspects:", r.retriever.as_str());
                for (facet, share) in &r.aspect_distribution {
                    let _ = writeln!(out, "  {facet:<22} {:>6.2}%", share * 100.0);
                }
            }
        }
        out
    }
}
