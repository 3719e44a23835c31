use crate::retrieval::RankedList;

/// Cutoff used by every benchmark metric.
pub const METRIC_K: usize = 10;

/// Reciprocal rank of `truth` within the first `k` entries, else 0.
///
/// # Panics
/// If `k` is 0.
pub fn mrr_at_k(ranked: &RankedList, truth: &str, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    match ranked.rank_of(truth) {
        Some(rank) if rank <= k => 1.0 / rank as f64,
        _ => 0.0,
    }
}

/// 1 if `truth` is within the first `k` entries, else 0.
///
/// # Panics
/// If `k` is 0.
pub fn hit_at_k(ranked: &RankedList, truth: &str, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    match ranked.rank_of(truth) {
        Some(rank) if rank <= k => 1.0,
        _ => 0.0,
    }
}
