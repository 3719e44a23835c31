use crate::catalog::{fold, MatchMode, StructuredQuery};
use crate::retrieval::tokenize;

use super::memory::{is_other, Answer, ClarificationQuestion, DemandRecord, SessionMemory};

/// Deterministic Text2SQL substitute: the session category plus one
/// substring constraint per facet that has concrete answers (chosen options
/// and free-text tokens, OR-combined).
pub fn build_structured_query(memory: &SessionMemory, max_number: usize) -> StructuredQuery {
    let mut query = StructuredQuery::new(memory.category.clone().unwrap_or_default(), max_number);
    for demand in &memory.demands {
        let Some(facet) = demand.facet else { continue };
        let mut values: Vec<String> = demand.concrete_options().map(fold).collect();
        if let Some(text) = &demand.free_text {
            values.extend(tokenize(text));
        }
        query.add_values(facet, values, MatchMode::Substring);
    }
    query
}

/// Keyword query: the category (or the initial free-form query) followed by
/// every concrete option and free-text token, deduplicated, in demand order.
pub fn generate_nl_query(memory: &SessionMemory) -> String {
    let base = memory
        .initial_query
        .clone()
        .or_else(|| memory.category.clone())
        .unwrap_or_default();
    let mut parts: Vec<String> = vec![base.trim().to_string()];
    let mut seen: Vec<String> = vec![fold(&base)];
    let mut push = |part: &str| {
        let key = fold(part);
        if !key.is_empty() && !seen.contains(&key) {
            seen.push(key);
            parts.push(part.trim().to_string());
        }
    };
    for demand in &memory.demands {
        for option in demand.concrete_options() {
            push(option);
        }
        if let Some(text) = &demand.free_text {
            for token in tokenize(text) {
                push(&token);
            }
        }
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

fn split_pieces(text: &str) -> Vec<String> {
    text.split([',', ';', '\n', '，', '；', '、'])
        .map(|p| p.trim().trim_matches(|c| c == '"' || c == '\'' || c == '.').trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Turns per-question answers into demand records.
///
/// Selected strings and free-text pieces that match a candidate
/// (case-insensitively) become chosen options; everything else is kept as
/// free text. An empty answer counts as "Other".
///
/// # Panics
/// If `answers` and `questions` differ in length.
pub fn parse_user_reply(answers: &[Answer], questions: &[ClarificationQuestion], turn: usize) -> Vec<DemandRecord> {
    assert_eq!(answers.len(), questions.len(), "one answer per question");
    answers
        .iter()
        .zip(questions)
        .map(|(answer, question)| {
            let mut chosen: Vec<String> = Vec::new();
            let mut leftover: Vec<String> = Vec::new();
            let mut choose = |text: &str, leftover: &mut Vec<String>| match question.find_candidate(text) {
                Some(c) => {
                    if !chosen.iter().any(|x| x == c) {
                        chosen.push(c.to_string());
                    }
                }
                None => leftover.push(text.trim().to_string()),
            };
            for s in &answer.selected {
                if !s.trim().is_empty() {
                    choose(s, &mut leftover);
                }
            }
            if let Some(text) = answer.free_text.as_deref().map(str::trim).filter(|t| !t.is_empty()) {
                if question.find_candidate(text).is_some() {
                    choose(text, &mut leftover);
                } else {
                    let pieces = split_pieces(text);
                    let matched = pieces.iter().filter(|p| question.find_candidate(p).is_some()).count();
                    if matched == 0 {
                        leftover.push(text.to_string());
                    } else {
                        for piece in &pieces {
                            choose(piece, &mut leftover);
                        }
                    }
                }
            }
            let free_text = (!leftover.is_empty()).then(|| leftover.join(", "));
            if chosen.is_empty() && free_text.is_none() {
                chosen.push(super::OTHER.to_string());
            }
            // "Other" next to concrete picks adds nothing
            if chosen.len() > 1 {
                chosen.retain(|c| !is_other(c));
            }
            DemandRecord {
                turn,
                facet: question.facet,
                question_text: question.text.clone(),
                chosen_options: chosen,
                free_text,
            }
        })
        .collect()
}
