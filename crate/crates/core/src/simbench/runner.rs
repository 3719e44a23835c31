use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::{turn_seed, Agent, AgentConfig, ClarificationQuestion, FailureCounters, SessionMemory, UserInput};
use crate::catalog::{Catalog, FacetId, ProductItem};
use crate::llm_bridge::LlmBridge;
use crate::retrieval::{tokenize, HashEmbedder, RankedList, RetrieverKind, SearchEngine, DEFAULT_DIMENSION};

use super::analysis::{aspect_distribution, failure_rates, max_similarities, mean, question_signature};
use super::doc2query::doc2query;
use super::metrics::{hit_at_k, mrr_at_k, METRIC_K};
use super::report::{BenchmarkReport, RunReport, SIMILARITY_MEASURE};
use super::simulator::SimulatedUser;
use super::spec::{BenchmarkSpec, Setting};
use super::BenchError;

const SESSION_STREAM: usize = 0x5e55;
const SAMPLE_STREAM: usize = 0x5a3b;

/// Seeded sample of `per_category` documents from every category, in
/// category order then catalog order.
pub fn sample_truths<'a>(catalog: &'a Catalog, per_category: usize, seed: u64) -> Result<Vec<&'a ProductItem>, BenchError> {
    let mut out = Vec::new();
    let base = turn_seed(seed, SAMPLE_STREAM);
    for (ci, category) in catalog.categories().into_iter().enumerate() {
        let bucket: Vec<&ProductItem> = catalog.bucket(category).collect();
        if per_category > bucket.len() {
            return Err(BenchError::NotEnoughDocs {
                category: category.to_string(),
                available: bucket.len(),
                requested: per_category,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(turn_seed(base, ci));
        let mut picked = index::sample(&mut rng, bucket.len(), per_category).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| bucket[i]));
    }
    Ok(out)
}

/// Session seed for the `index`-th sampled document.
pub fn session_seed(seed: u64, index: usize) -> u64 {
    turn_seed(turn_seed(seed, SESSION_STREAM), index)
}

fn query_tokens(q: &str) -> f64 {
    tokenize(q).len() as f64
}

struct TurnMetrics {
    mrr: f64,
    hit: f64,
    rr_mrr: f64,
    rr_hit: f64,
    query_len: f64,
}

/// Everything recorded from one simulated dialogue.
pub struct SessionOutcome {
    turns: Vec<TurnMetrics>,
    questions: Vec<Vec<ClarificationQuestion>>,
    counters: FailureCounters,
    exhausted: bool,
    failed: bool,
    pub memory: SessionMemory,
}

fn score(engine: &SearchEngine, query: &str, items: &RankedList, truth: &str, rerank: bool) -> TurnMetrics {
    let (rr_mrr, rr_hit) = if rerank {
        let rr = engine.rerank(query, items, items.len().max(1));
        (mrr_at_k(&rr, truth, METRIC_K), hit_at_k(&rr, truth, METRIC_K))
    } else {
        (0.0, 0.0)
    };
    TurnMetrics {
        mrr: mrr_at_k(items, truth, METRIC_K),
        hit: hit_at_k(items, truth, METRIC_K),
        rr_mrr,
        rr_hit,
        query_len: query_tokens(query),
    }
}

fn agent_config(spec: &BenchmarkSpec, retriever: RetrieverKind) -> AgentConfig {
    AgentConfig {
        n: spec.agent.n,
        k: spec.agent.k,
        max_number: spec.agent.max_number,
        top_m: spec.agent.top_m,
        retriever,
        rerank: false,
        stats_source: spec.stats_source,
        seed: spec.seed,
    }
}

/// Runs one dialogue against `truth` for `spec.turns` user turns.
pub fn run_session(
    agent: &Agent,
    spec: &BenchmarkSpec,
    truth: &ProductItem,
    index: usize,
    bridge: Option<&LlmBridge>,
) -> SessionOutcome {
    let seed = session_seed(spec.seed, index);
    let mut memory = SessionMemory::new(format!("session-{index:05}"), seed);
    let user = SimulatedUser::new(truth.clone())
        .with_policy(spec.simulator.policy())
        .with_free_text(spec.simulator.free_text);
    let mut input = UserInput::Start {
        category: truth.category.clone(),
        query: (spec.setting == Setting::WarmStart).then(|| doc2query(truth, spec.doc2query, seed, bridge)),
    };
    let mut outcome =
        SessionOutcome { turns: Vec::new(), questions: Vec::new(), counters: FailureCounters::default(), exhausted: false, failed: false, memory: SessionMemory::new("", 0) };
    for _ in 0..spec.turns {
        let out = match agent.step(&mut memory, input) {
            Ok(out) => out,
            Err(_) => {
                outcome.failed = true;
                break;
            }
        };
        outcome.turns.push(score(agent.engine(), &out.query, &out.items, &truth.id, spec.rerank));
        outcome.questions.push(out.questions.clone());
        if out.exhausted {
            outcome.exhausted = outcome.turns.len() < spec.turns;
            break;
        }
        input = UserInput::Answers(user.simulate_answer(&out.questions));
    }
    outcome.counters = memory.counters;
    outcome.memory = memory;
    outcome
}

fn per_turn(outcomes: &[SessionOutcome], turns: usize, f: impl Fn(&TurnMetrics) -> f64) -> Vec<f64> {
    (0..turns)
        .map(|t| {
            let values: Vec<f64> = outcomes
                .iter()
                .map(|o| o.turns.get(t).or(o.turns.last()).map(&f).unwrap_or(0.0))
                .collect();
            mean(&values)
        })
        .collect()
}

fn summarize_run(retriever: RetrieverKind, spec: &BenchmarkSpec, outcomes: &[SessionOutcome]) -> RunReport {
    let t = spec.turns;
    let embedder = HashEmbedder::new(DEFAULT_DIMENSION);
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); t.saturating_sub(1)];
    for o in outcomes {
        let texts: Vec<Vec<String>> =
            o.questions.iter().map(|qs| qs.iter().map(question_signature).collect()).collect();
        for (i, sims) in max_similarities(&texts, &embedder).into_iter().enumerate() {
            pooled[i].extend(sims);
        }
    }
    let facets: Vec<Option<FacetId>> =
        outcomes.iter().flat_map(|o| o.questions.iter().flatten().map(|q| q.facet)).collect();
    let (invalid_rate, trivial_rate) = failure_rates(outcomes.iter().map(|o| &o.counters));
    RunReport {
        retriever,
        mrr_at_10: per_turn(outcomes, t, |m| m.mrr),
        hit_at_10: per_turn(outcomes, t, |m| m.hit),
        rerank_mrr_at_10: spec.rerank.then(|| per_turn(outcomes, t, |m| m.rr_mrr)),
        rerank_hit_at_10: spec.rerank.then(|| per_turn(outcomes, t, |m| m.rr_hit)),
        query_length: per_turn(outcomes, t, |m| m.query_len),
        structured_attempts: outcomes.iter().map(|o| o.counters.structured_attempts).sum(),
        invalid_queries: outcomes.iter().map(|o| o.counters.invalid_query).sum(),
        trivial_queries: outcomes.iter().map(|o| o.counters.trivial_query).sum(),
        invalid_rate,
        trivial_rate,
        exhausted_sessions: outcomes.iter().filter(|o| o.exhausted).count(),
        failed_sessions: outcomes.iter().filter(|o| o.failed).count(),
        question_similarity: pooled.iter().map(|s| mean(s)).collect(),
        aspect_distribution: aspect_distribution(&facets),
    }
}

/// Conversational benchmark; also returns every session's memory, grouped
/// by retriever in spec order.
pub fn run_conversational_detailed(
    catalog: Arc<Catalog>,
    engine: Arc<SearchEngine>,
    spec: &BenchmarkSpec,
    bridge: Option<Arc<LlmBridge>>,
) -> Result<(BenchmarkReport, Vec<Vec<SessionMemory>>), BenchError> {
    spec.validate()?;
    if !spec.setting.is_conversational() {
        return Err(BenchError::Spec("setting is not conversational".into()));
    }
    let truths = sample_truths(&catalog, spec.docs_per_category, spec.seed)?;
    let mut runs = Vec::new();
    let mut memories = Vec::new();
    for &retriever in &spec.retrievers {
        let mut agent = Agent::new(Arc::clone(&catalog), Arc::clone(&engine), agent_config(spec, retriever));
        if let Some(b) = &bridge {
            agent = agent.with_bridge(Arc::clone(b));
        }
        let outcomes: Vec<SessionOutcome> = truths
            .par_iter()
            .enumerate()
            .map(|(i, truth)| run_session(&agent, spec, truth, i, bridge.as_deref()))
            .collect();
        runs.push(summarize_run(retriever, spec, &outcomes));
        memories.push(outcomes.into_iter().map(|o| o.memory).collect());
    }
    let report = BenchmarkReport {
        setting: spec.setting,
        sessions: truths.len(),
        turns: spec.turns,
        similarity_measure: SIMILARITY_MEASURE.into(),
        runs,
        config: spec.clone(),
    };
    Ok((report, memories))
}

pub fn run_conversational(
    catalog: Arc<Catalog>,
    engine: Arc<SearchEngine>,
    spec: &BenchmarkSpec,
    bridge: Option<Arc<LlmBridge>>,
) -> Result<BenchmarkReport, BenchError> {
    run_conversational_detailed(catalog, engine, spec, bridge).map(|(r, _)| r)
}

/// Single-shot retrieval of one synthesized query per sampled document.
pub fn run_traditional(
    catalog: &Catalog,
    engine: &SearchEngine,
    spec: &BenchmarkSpec,
    bridge: Option<&LlmBridge>,
) -> Result<BenchmarkReport, BenchError> {
    spec.validate()?;
    if spec.setting != Setting::Traditional {
        return Err(BenchError::Spec("setting is not traditional".into()));
    }
    let truths = sample_truths(catalog, spec.docs_per_category, spec.seed)?;
    let queries: Vec<String> = truths
        .par_iter()
        .enumerate()
        .map(|(i, truth)| doc2query(truth, spec.doc2query, session_seed(spec.seed, i), bridge))
        .collect();
    let mut runs = Vec::new();
    for &retriever in &spec.retrievers {
        let metrics: Vec<TurnMetrics> = truths
            .par_iter()
            .zip(queries.par_iter())
            .map(|(truth, q)| score(engine, q, &engine.search(q, retriever, METRIC_K), &truth.id, spec.rerank))
            .collect();
        let col = |f: fn(&TurnMetrics) -> f64| vec![mean(&metrics.iter().map(f).collect::<Vec<_>>())];
        runs.push(RunReport {
            retriever,
            mrr_at_10: col(|m| m.mrr),
            hit_at_10: col(|m| m.hit),
            rerank_mrr_at_10: spec.rerank.then(|| col(|m| m.rr_mrr)),
            rerank_hit_at_10: spec.rerank.then(|| col(|m| m.rr_hit)),
            query_length: col(|m| m.query_len),
            structured_attempts: 0,
            invalid_queries: 0,
            trivial_queries: 0,
            invalid_rate: 0.0,
            trivial_rate: 0.0,
            exhausted_sessions: 0,
            failed_sessions: 0,
            question_similarity: Vec::new(),
            aspect_distribution: Default::default(),
        });
    }
    Ok(BenchmarkReport {
        setting: spec.setting,
        sessions: truths.len(),
        turns: 1,
        similarity_measure: SIMILARITY_MEASURE.into(),
        runs,
        config: spec.clone(),
    })
}
