//! Faceted product catalog: ingestion, structured filtering, category
//! statistics, and a deterministic synthetic generator.

mod item;
mod query;
mod stats;
mod synthetic;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub use item::{fold, FacetId, ProductItem, UnknownFacet};
pub use query::{Constraint, MatchMode, QueryError, StructuredQuery};
pub use stats::{summarize, CategoryStatistics, ValueCount, DEFAULT_TOP_M};
pub use synthetic::{generate_synthetic_catalog, SyntheticSpec};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("item {id:?}: {message}")]
    InvalidItem { id: String, message: String },
    #[error("items span more than one category: `{0}` and `{1}`")]
    MixedCategories(String, String),
    #[error("value space too small for separable items: {message}")]
    ValueSpaceTooSmall { message: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Immutable, id-ordered collection of product items grouped by category.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    items: Vec<ProductItem>,
    by_id: BTreeMap<String, usize>,
    // folded category -> (display name, item indices in id order)
    buckets: BTreeMap<String, (String, Vec<usize>)>,
}

impl Catalog {
    /// Normalizes and validates `items`, then indexes them.
    pub fn from_items(items: impl IntoIterator<Item = ProductItem>) -> Result<Self, CatalogError> {
        let mut items: Vec<ProductItem> = items
            .into_iter()
            .map(|mut item| {
                item.normalize();
                item
            })
            .collect();
        let mut seen = HashSet::new();
        for item in &items {
            validate_item(item)?;
            if !seen.insert(item.id.clone()) {
                return Err(CatalogError::DuplicateId(item.id.clone()));
            }
        }
        items.sort_by(|a, b| a.id.cmp(&b.id));

        let mut by_id = BTreeMap::new();
        let mut buckets: BTreeMap<String, (String, Vec<usize>)> = BTreeMap::new();
        for (idx, item) in items.iter().enumerate() {
            by_id.insert(item.id.clone(), idx);
            buckets
                .entry(fold(&item.category))
                .or_insert_with(|| (item.category.clone(), Vec::new()))
                .1
                .push(idx);
        }
        Ok(Catalog { items, by_id, buckets })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// All items in ascending id order.
    pub fn items(&self) -> &[ProductItem] {
        &self.items
    }

    pub fn get(&self, id: &str) -> Option<&ProductItem> {
        self.by_id.get(id).map(|&i| &self.items[i])
    }

    /// Display names of all categories, sorted by folded name.
    pub fn categories(&self) -> Vec<&str> {
        self.buckets.values().map(|(name, _)| name.as_str()).collect()
    }

    pub fn category_count(&self) -> usize {
        self.buckets.len()
    }

    /// Canonical display name of a category, matched case-insensitively.
    pub fn resolve_category(&self, category: &str) -> Option<&str> {
        self.buckets.get(&fold(category)).map(|(name, _)| name.as_str())
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.buckets.contains_key(&fold(category))
    }

    /// Items of one category in ascending id order; empty for unknown ones.
    pub fn bucket(&self, category: &str) -> impl Iterator<Item = &ProductItem> + '_ {
        self.buckets
            .get(&fold(category))
            .map(|(_, idx)| idx.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.items[i])
    }

    pub fn bucket_len(&self, category: &str) -> usize {
        self.buckets.get(&fold(category)).map_or(0, |(_, idx)| idx.len())
    }

    /// Up to `q.limit` items of `q.category` satisfying every constraint,
    /// in ascending id order.
    pub fn execute(&self, q: &StructuredQuery) -> Vec<&ProductItem> {
        self.bucket(&q.category)
            .filter(|item| q.matches(item))
            .take(q.limit)
            .collect()
    }

    /// Writes the catalog in its line-delimited file format.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CatalogError> {
        for item in &self.items {
            serde_json::to_writer(&mut out, item).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CatalogError> {
        let file = File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Parses the line-delimited format; blank lines are ignored.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, CatalogError> {
        let mut items = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let item: ProductItem = serde_json::from_str(&line).map_err(|e| CatalogError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?;
            items.push(item);
        }
        Catalog::from_items(items)
    }
}

/// Loads a catalog file (one JSON item record per line).
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let file = File::open(path)?;
    Catalog::read_jsonl(BufReader::new(file))
}

fn validate_item(item: &ProductItem) -> Result<(), CatalogError> {
    if item.id.is_empty() {
        return Err(CatalogError::InvalidItem {
            id: item.id.clone(),
            message: "empty id".into(),
        });
    }
    if item.category.is_empty() {
        return Err(CatalogError::InvalidItem {
            id: item.id.clone(),
            message: "empty category".into(),
        });
    }
    Ok(())
}
