use serde::{Deserialize, Serialize};

use super::item::{fold, FacetId, ProductItem};

/// How a constraint value is compared with an item value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Case-insensitive equality.
    Exact,
    /// Case-insensitive containment, like SQL `LIKE '%v%'`.
    Substring,
}

/// Values within one constraint are OR-combined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub facet: FacetId,
    pub values: Vec<String>,
    pub mode: MatchMode,
}

impl Constraint {
    pub fn new(facet: FacetId, values: Vec<String>, mode: MatchMode) -> Self {
        Constraint { facet, values, mode }
    }

    pub fn matches(&self, item: &ProductItem) -> bool {
        let wanted: Vec<String> = self.values.iter().map(|v| fold(v)).collect();
        item.values(self.facet).iter().any(|have| {
            let have = fold(have);
            wanted.iter().any(|w| match self.mode {
                MatchMode::Exact => have == *w,
                MatchMode::Substring => have.contains(w.as_str()),
            })
        })
    }
}

/// Category filter plus AND-combined facet constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredQuery {
    pub category: String,
    pub constraints: Vec<Constraint>,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("limit must be at least 1")]
    ZeroLimit,
    #[error("constraint on `{0}` has no values")]
    EmptyValues(FacetId),
    #[error("more than one constraint on `{0}`")]
    DuplicateFacet(FacetId),
}

impl StructuredQuery {
    pub fn new(category: impl Into<String>, limit: usize) -> Self {
        StructuredQuery { category: category.into(), constraints: Vec::new(), limit }
    }

    /// Adds values for `facet`, merging into an existing constraint on the
    /// same facet so there is at most one per facet. Duplicate values
    /// (after folding) are skipped.
    pub fn add_values(&mut self, facet: FacetId, values: impl IntoIterator<Item = String>, mode: MatchMode) {
        let idx = match self.constraints.iter().position(|c| c.facet == facet) {
            Some(idx) => idx,
            None => {
                self.constraints.push(Constraint::new(facet, Vec::new(), mode));
                self.constraints.len() - 1
            }
        };
        let constraint = &mut self.constraints[idx];
        for value in values {
            let value = fold(&value);
            if !value.is_empty() && !constraint.values.contains(&value) {
                constraint.values.push(value);
            }
        }
        if constraint.values.is_empty() {
            self.constraints.remove(idx);
        }
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.limit == 0 {
            return Err(QueryError::ZeroLimit);
        }
        let mut seen = Vec::new();
        for c in &self.constraints {
            if c.values.is_empty() {
                return Err(QueryError::EmptyValues(c.facet));
            }
            if seen.contains(&c.facet) {
                return Err(QueryError::DuplicateFacet(c.facet));
            }
            seen.push(c.facet);
        }
        Ok(())
    }

    /// Category equality (case-insensitive) and every constraint.
    pub fn matches(&self, item: &ProductItem) -> bool {
        fold(&item.category) == fold(&self.category) && self.constraints.iter().all(|c| c.matches(item))
    }
}
