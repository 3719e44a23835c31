use std::collections::{BTreeSet, HashSet};

use crate::catalog::{fold, CategoryStatistics, FacetId, ValueCount};

use super::memory::{is_other, ClarificationQuestion, SessionMemory};
use super::AgentError;

/// Concrete options per question; "Other" makes the sixth.
pub const OPTIONS_PER_QUESTION: usize = 5;

/// Shannon entropy in bits of a count distribution.
pub fn entropy_bits(counts: impl IntoIterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

pub fn question_text(facet: FacetId, category: &str) -> String {
    let c = category.to_lowercase();
    match facet {
        FacetId::Category => format!("Which kind of {c} are you looking for?"),
        FacetId::Brand => format!("Which brand of {c} do you prefer?"),
        FacetId::Series => format!("Is there a particular {c} series you are after?"),
        FacetId::TargetCustomer => format!("Who are the {c} for?"),
        FacetId::ApplicableScenario => format!("In which situations will you use the {c}?"),
        FacetId::DecorativeAttribute => format!("Which decorative details do you want on the {c}?"),
        FacetId::Material => format!("Which material do you prefer for the {c}?"),
        FacetId::Style => format!("Which style of {c} do you like?"),
        FacetId::Specification => format!("Which size or specification of {c} do you need?"),
        FacetId::Color => format!("Which color of {c} do you want?"),
        FacetId::Function => format!("Which functions matter most to you in {c}?"),
    }
}

fn usable_values(stats: &CategoryStatistics, facet: FacetId) -> Vec<&ValueCount> {
    stats.values(facet).iter().filter(|vc| !is_other(&vc.value)).collect()
}

struct Candidate {
    facet: FacetId,
    entropy: f64,
    values: Vec<String>,
}

/// Picks `n` facet questions from the statistics.
///
/// Facets with fewer than two distinct values are never asked. Unasked
/// facets go first, highest entropy first. If that leaves a shortfall,
/// already-asked facets whose top values changed are re-asked, then the
/// least recently asked facets are offered values not shown on them
/// before. No returned question repeats an asked (facet, option set) pair,
/// and no two returned questions share a facet. Fewer than `n` questions
/// come back only when no further question is possible.
pub fn generate_questions(
    memory: &SessionMemory,
    stats: &CategoryStatistics,
    n: usize,
) -> Result<Vec<ClarificationQuestion>, AgentError> {
    let category = memory.category.clone().unwrap_or_else(|| stats.category.clone());
    let asked_keys: HashSet<(Option<FacetId>, BTreeSet<String>)> =
        memory.asked_questions.iter().map(|(_, q)| q.key()).collect();
    let asked_facets: Vec<FacetId> = memory.asked_questions.iter().filter_map(|(_, q)| q.facet).collect();

    let mut candidates: Vec<Candidate> = FacetId::LIST
        .into_iter()
        .filter_map(|facet| {
            let values = usable_values(stats, facet);
            (values.len() >= 2).then(|| Candidate {
                facet,
                entropy: entropy_bits(values.iter().map(|vc| vc.count)),
                values: values.iter().map(|vc| vc.value.clone()).collect(),
            })
        })
        .collect();
    // stable: equal entropies keep canonical facet order
    candidates.sort_by(|a, b| b.entropy.total_cmp(&a.entropy));

    let mut out: Vec<ClarificationQuestion> = Vec::with_capacity(n);
    let make = |facet: FacetId, values: Vec<String>| {
        ClarificationQuestion::new(Some(facet), question_text(facet, &category), values)
            .expect("options come from distinct statistics values")
    };
    let used = |out: &[ClarificationQuestion], facet: FacetId| out.iter().any(|q| q.facet == Some(facet));

    for c in candidates.iter().filter(|c| !asked_facets.contains(&c.facet)) {
        if out.len() == n {
            break;
        }
        out.push(make(c.facet, c.values.iter().take(OPTIONS_PER_QUESTION).cloned().collect()));
    }

    for c in candidates.iter().filter(|c| asked_facets.contains(&c.facet)) {
        if out.len() == n {
            break;
        }
        let q = make(c.facet, c.values.iter().take(OPTIONS_PER_QUESTION).cloned().collect());
        if !asked_keys.contains(&q.key()) && !used(&out, c.facet) {
            out.push(q);
        }
    }

    if out.len() < n {
        // least recently asked first
        let mut by_recency: Vec<(usize, FacetId)> = Vec::new();
        for (pos, (_, q)) in memory.asked_questions.iter().enumerate() {
            if let Some(f) = q.facet {
                by_recency.retain(|&(_, g)| g != f);
                by_recency.push((pos, f));
            }
        }
        for (_, facet) in by_recency {
            if out.len() == n {
                break;
            }
            let Some(c) = candidates.iter().find(|c| c.facet == facet) else { continue };
            if used(&out, facet) {
                continue;
            }
            let offered: HashSet<String> = memory
                .asked_questions
                .iter()
                .filter(|(_, q)| q.facet == Some(facet))
                .flat_map(|(_, q)| q.options().iter().map(|o| fold(o)))
                .collect();
            let fresh: Vec<String> =
                c.values.iter().filter(|v| !offered.contains(&fold(v))).take(OPTIONS_PER_QUESTION).cloned().collect();
            if fresh.is_empty() {
                continue;
            }
            let q = make(facet, fresh);
            if !asked_keys.contains(&q.key()) {
                out.push(q);
            }
        }
    }

    if out.is_empty() {
        return Err(AgentError::NoAskableFacet);
    }
    Ok(out)
}
