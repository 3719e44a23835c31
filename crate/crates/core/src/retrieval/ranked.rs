use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub id: String,
    pub score: f64,
}

/// Scores descending, ids ascending on ties.
pub fn rank_order(a: &ScoredDoc, b: &ScoredDoc) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id))
}

/// Ordered retrieval result cut to `k` entries.
///
/// Scores are non-increasing, ids distinct, ties ordered by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub entries: Vec<ScoredDoc>,
    pub k: usize,
}

impl RankedList {
    pub fn empty(k: usize) -> Self {
        RankedList { entries: Vec::new(), k }
    }

    /// Sorts arbitrary (id, score) pairs into a valid list. Ids must be
    /// distinct; NaN scores are treated as negative infinity.
    pub fn from_scores(scores: impl IntoIterator<Item = (String, f64)>, k: usize) -> Self {
        let mut entries: Vec<ScoredDoc> = scores
            .into_iter()
            .map(|(id, score)| ScoredDoc { id, score: if score.is_nan() { f64::NEG_INFINITY } else { score } })
            .collect();
        if entries.len() > k {
            entries.select_nth_unstable_by(k.saturating_sub(1), rank_order);
            entries.truncate(k);
        }
        entries.sort_by(rank_order);
        RankedList { entries, k }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.id.as_str())
    }

    /// 1-based rank of `id`, if present.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id).map(|p| p + 1)
    }

    /// First `k` entries as a new list.
    pub fn top(&self, k: usize) -> RankedList {
        RankedList { entries: self.entries.iter().take(k).cloned().collect(), k }
    }

    /// Checks the ordering, distinctness, and length invariants.
    pub fn check(&self) -> Result<(), String> {
        if self.entries.len() > self.k {
            return Err(format!("{} entries exceed k={}", self.entries.len(), self.k));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(format!("duplicate id {}", e.id));
            }
        }
        for pair in self.entries.windows(2) {
            if rank_order(&pair[0], &pair[1]) != Ordering::Less {
                return Err(format!("entries {} and {} out of order", pair[0].id, pair[1].id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_cuts() {
        let list = RankedList::from_scores(
            vec![("b".into(), 1.0), ("a".into(), 1.0), ("c".into(), 3.0), ("d".into(), 0.5)],
            3,
        );
        assert_eq!(list.ids().collect::<Vec<_>>(), ["c", "a", "b"]);
        list.check().unwrap();
        assert_eq!(list.rank_of("b"), Some(3));
        assert_eq!(list.rank_of("d"), None);
    }

    #[test]
    fn check_detects_violations() {
        let bad = RankedList {
            entries: vec![ScoredDoc { id: "a".into(), score: 1.0 }, ScoredDoc { id: "b".into(), score: 2.0 }],
            k: 5,
        };
        assert!(bad.check().is_err());
    }
}
