use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::item::{fold, FacetId, ProductItem};
use super::CatalogError;

/// Values kept per facet when summarizing a category.
pub const DEFAULT_TOP_M: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCount {
    pub value: String,
    pub count: usize,
}

/// Per-facet value frequencies over a pool of items from one category.
///
/// Every list facet has an entry; an entry is empty iff no item in the
/// pool has a value for that facet. Each list is sorted by count
/// descending, then folded value ascending, and truncated to the top `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStatistics {
    pub category: String,
    pub item_count: usize,
    pub facets: BTreeMap<FacetId, Vec<ValueCount>>,
}

impl CategoryStatistics {
    /// Statistics with no items and no values.
    pub fn empty(category: impl Into<String>) -> Self {
        CategoryStatistics {
            category: category.into(),
            item_count: 0,
            facets: FacetId::LIST.into_iter().map(|f| (f, Vec::new())).collect(),
        }
    }

    pub fn values(&self, facet: FacetId) -> &[ValueCount] {
        self.facets.get(&facet).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.facets.values().all(Vec::is_empty)
    }

    /// Whether `value` (folded) is among the retained values of `facet`.
    pub fn contains(&self, facet: FacetId, value: &str) -> bool {
        let key = fold(value);
        self.values(facet).iter().any(|vc| fold(&vc.value) == key)
    }

    /// Compact text rendering, one facet per line, for prompts and logs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (facet, values) in &self.facets {
            if values.is_empty() {
                continue;
            }
            let joined: Vec<String> = values.iter().map(|vc| format!("{} ({})", vc.value, vc.count)).collect();
            out.push_str(&format!("{}: {}\n", facet.label(), joined.join(", ")));
        }
        out
    }
}

/// Counts distinct folded values per facet over `items`, keeping the top `m`.
///
/// The displayed spelling of a value is the first one encountered.
pub fn summarize<'a>(
    items: impl IntoIterator<Item = &'a ProductItem>,
    m: usize,
) -> Result<CategoryStatistics, CatalogError> {
    let mut category: Option<&str> = None;
    let mut item_count = 0usize;
    let mut counts: BTreeMap<FacetId, HashMap<String, (String, usize)>> = BTreeMap::new();

    for item in items {
        match category {
            None => category = Some(&item.category),
            Some(c) if fold(c) != fold(&item.category) => {
                return Err(CatalogError::MixedCategories(c.to_string(), item.category.clone()))
            }
            Some(_) => {}
        }
        item_count += 1;
        for facet in FacetId::LIST {
            let facet_counts = counts.entry(facet).or_default();
            let mut seen_in_item: Vec<String> = Vec::new();
            for value in item.values(facet) {
                let key = fold(value);
                if key.is_empty() || seen_in_item.contains(&key) {
                    continue;
                }
                seen_in_item.push(key.clone());
                facet_counts.entry(key).or_insert_with(|| (value.trim().to_string(), 0)).1 += 1;
            }
        }
    }

    let mut stats = CategoryStatistics::empty(category.unwrap_or_default());
    stats.item_count = item_count;
    for (facet, facet_counts) in counts {
        let mut ranked: Vec<(String, String, usize)> =
            facet_counts.into_iter().map(|(key, (display, n))| (key, display, n)).collect();
        ranked.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(m);
        stats.facets.insert(
            facet,
            ranked.into_iter().map(|(_, value, count)| ValueCount { value, count }).collect(),
        );
    }
    Ok(stats)
}
