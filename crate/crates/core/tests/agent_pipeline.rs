use std::collections::HashSet;
use std::sync::Arc;

use prodclarify_core::agent::{
    build_structured_query, Agent, AgentConfig, SessionMemory, StatsSource, UserInput,
};
use prodclarify_core::catalog::{generate_synthetic_catalog, Catalog, FacetId, ProductItem, SyntheticSpec};
use prodclarify_core::llm_bridge::{BackendError, FnBackend, LlmBridge};
use prodclarify_core::retrieval::SearchEngine;
use prodclarify_core::simbench::SimulatedUser;
use proptest::prelude::*;

fn shared() -> (Arc<Catalog>, Arc<SearchEngine>) {
    let catalog = generate_synthetic_catalog(21, SyntheticSpec::new(2, 150, 10)).unwrap();
    let engine = SearchEngine::from_catalog(&catalog).unwrap();
    (Arc::new(catalog), Arc::new(engine))
}

fn converse(agent: &Agent, truth: &ProductItem, turns: usize, seed: u64) -> SessionMemory {
    let mut memory = SessionMemory::new("s", seed);
    let user = SimulatedUser::new(truth.clone());
    let mut input = UserInput::category(truth.category.clone());
    let mut demands_before = 0;
    for _ in 0..turns {
        let out = agent.step(&mut memory, input).unwrap();
        assert!(memory.demands.len() >= demands_before);
        demands_before = memory.demands.len();
        if out.exhausted {
            break;
        }
        input = UserInput::Answers(user.simulate_answer(&out.questions));
    }
    memory
}

/// Replays each turn's structured query from the demands known at that
/// turn and counts the ones matching nothing.
fn empty_executions(catalog: &Catalog, memory: &SessionMemory, max_number: usize) -> usize {
    (1..=memory.agent_turns())
        .filter(|&t| {
            let mut at = memory.clone();
            at.demands.retain(|d| d.turn < t);
            catalog.execute(&build_structured_query(&at, max_number)).is_empty()
        })
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dialogue_invariants(pick in 0usize..300, seed in any::<u64>()) {
        let (catalog, engine) = shared();
        let agent = Agent::new(Arc::clone(&catalog), engine, AgentConfig::default());
        let truth = catalog.items()[pick].clone();
        let memory = converse(&agent, &truth, 5, seed);

        prop_assert!(memory.check().is_ok());
        let turns = memory.agent_turns();
        prop_assert_eq!(memory.dialogue_log.len(), 2 * turns);
        prop_assert_eq!(memory.search_history.len(), turns);

        let mut keys = HashSet::new();
        for (turn, q) in &memory.asked_questions {
            prop_assert!(keys.insert(q.key()), "repeated question {:?}", q);
            prop_assert!(q.validate().is_ok());
            let stats = &memory.stats_history[turn - 1];
            let facet = q.facet.unwrap();
            for c in q.options() {
                prop_assert!(stats.contains(facet, c), "{c} not in statistics for {facet:?}");
            }
        }
        for out in memory.turn_outputs() {
            let facets: HashSet<Option<FacetId>> = out.questions.iter().map(|q| q.facet).collect();
            prop_assert_eq!(facets.len(), out.questions.len());
            prop_assert!(out.questions.len() <= 3);
            prop_assert!(out.items.check().is_ok());
        }

        prop_assert_eq!(memory.counters.structured_attempts, turns);
        prop_assert_eq!(memory.counters.invalid_query, 0);
        prop_assert_eq!(memory.counters.trivial_query, empty_executions(&catalog, &memory, 100));

        let again = converse(&agent, &truth, 5, seed);
        prop_assert_eq!(&memory, &again);
    }
}

#[test]
fn five_turn_session_fills_the_log() {
    let (catalog, engine) = shared();
    let agent = Agent::new(Arc::clone(&catalog), engine, AgentConfig::default());
    let memory = converse(&agent, &catalog.items()[7], 5, 1);
    assert_eq!(memory.agent_turns(), 5);
    assert_eq!(memory.dialogue_log.len(), 10);
    assert_eq!(memory.search_history.len(), 5);
}

#[test]
fn impossible_answers_count_as_trivial() {
    let (catalog, engine) = shared();
    let agent = Agent::new(Arc::clone(&catalog), engine, AgentConfig::default());
    let mut memory = agent.open_session("s");
    let mut out = agent.step(&mut memory, UserInput::category(catalog.categories()[0])).unwrap();
    for _ in 0..3 {
        let answers = out.questions.iter().map(|_| prodclarify_core::agent::Answer::text("qqqq zzzz")).collect();
        out = agent.step(&mut memory, UserInput::Answers(answers)).unwrap();
    }
    assert_eq!(memory.counters.structured_attempts, 4);
    assert_eq!(memory.counters.trivial_query, 3);
    assert_eq!(empty_executions(&catalog, &memory, 100), 3);
}

fn bridged(reply: impl Fn(&str) -> Result<String, BackendError> + Send + Sync + 'static) -> Agent {
    let (catalog, engine) = shared();
    let bridge = LlmBridge::new(Arc::new(FnBackend(reply)));
    Agent::new(catalog, engine, AgentConfig::default()).with_bridge(Arc::new(bridge))
}

#[test]
fn failing_backend_still_completes_sessions() {
    let (catalog, _) = shared();
    let truth = catalog.items()[3].clone();
    let plain = converse(&Agent::from_catalog((*catalog).clone(), AgentConfig::default()).unwrap(), &truth, 5, 9);

    let erroring = converse(&bridged(|_| Err(BackendError::Failed("down".into()))), &truth, 5, 9);
    assert_eq!(erroring.agent_turns(), plain.agent_turns());
    assert_eq!(erroring.counters.invalid_query, 0);
    assert_eq!(erroring.search_history, plain.search_history);

    let babbling = converse(&bridged(|_| Ok("Sorry, I cannot help with that.".into())), &truth, 5, 9);
    assert_eq!(babbling.agent_turns(), plain.agent_turns());
    assert_eq!(babbling.counters.invalid_query, babbling.counters.structured_attempts);
    assert!(babbling.check().is_ok());
}

#[test]
fn valid_model_sql_is_executed() {
    let (catalog, _) = shared();
    let category = catalog.categories()[1].to_string();
    let sql = format!("```sql\nSELECT * FROM item WHERE category = '{category}' LIMIT 100;\n```");
    let agent = bridged(move |prompt| {
        if prompt.contains("SQL generation assistant") {
            Ok(sql.clone())
        } else {
            Err(BackendError::Failed("only SQL".into()))
        }
    });
    let memory = converse(&agent, catalog.bucket(&category).next().unwrap(), 3, 2);
    assert_eq!(memory.counters.structured_attempts, memory.agent_turns());
    assert_eq!(memory.counters.invalid_query, 0);
    assert_eq!(memory.counters.trivial_query, 0);
}

#[test]
fn random_and_none_sources() {
    let (catalog, engine) = shared();
    let truth = catalog.items()[0].clone();
    let random = Agent::new(
        Arc::clone(&catalog),
        Arc::clone(&engine),
        AgentConfig { stats_source: StatsSource::Random, ..Default::default() },
    );
    assert_eq!(converse(&random, &truth, 4, 5), converse(&random, &truth, 4, 5));
    let none = Agent::new(catalog, engine, AgentConfig { stats_source: StatsSource::None, ..Default::default() });
    let m = converse(&none, &truth, 4, 5);
    assert_eq!(m.agent_turns(), 1);
    assert!(m.turn_outputs().next().unwrap().exhausted);
}
