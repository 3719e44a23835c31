use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{FacetId, ProductItem};
use crate::llm_bridge::LlmBridge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Doc2QueryMode {
    #[default]
    Template,
    Llm,
}

/// Category followed by one value from each of 3 to 5 distinct facets
/// (fewer if the item has fewer non-empty facets), in facet order.
pub fn template_query(item: &ProductItem, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filled: Vec<FacetId> = FacetId::LIST.into_iter().filter(|&f| !item.values(f).is_empty()).collect();
    let want = rng.gen_range(3..=5).min(filled.len());
    let mut chosen: Vec<FacetId> = filled.choose_multiple(&mut rng, want).copied().collect();
    chosen.sort();
    let mut parts = vec![item.category.trim().to_string()];
    for facet in chosen {
        let value = item.values(facet).choose(&mut rng).expect("facet is non-empty");
        parts.push(value.clone());
    }
    parts.join(" ")
}

/// Synthesizes a query from `item`. The model path falls back to the
/// template when the bridge is missing or fails.
pub fn doc2query(item: &ProductItem, mode: Doc2QueryMode, seed: u64, bridge: Option<&LlmBridge>) -> String {
    match (mode, bridge) {
        (Doc2QueryMode::Llm, Some(b)) => b.doc2query(item).unwrap_or_else(|_| template_query(item, seed)),
        _ => template_query(item, seed),
    }
}
