use std::collections::BTreeMap;

use super::ranked::RankedList;

pub const DEFAULT_RRF_K: f64 = 60.0;

/// Reciprocal rank fusion: each document scores `sum 1 / (k_const + rank)`
/// over the lists containing it, with ranks starting at 1.
///
/// Contributions are summed in ascending rank order, so the result does not
/// depend on the order of `lists`.
pub fn rrf_fuse(lists: &[RankedList], k_const: f64, k: usize) -> RankedList {
    let mut ranks: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for list in lists {
        for (pos, entry) in list.entries.iter().enumerate() {
            ranks.entry(entry.id.as_str()).or_default().push(pos + 1);
        }
    }
    RankedList::from_scores(
        ranks.into_iter().map(|(id, mut r)| {
            r.sort_unstable();
            let score: f64 = r.iter().map(|&rank| 1.0 / (k_const + rank as f64)).sum();
            (id.to_string(), score)
        }),
        k,
    )
}
