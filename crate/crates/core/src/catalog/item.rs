use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Attribute of a product that questions and structured queries can target.
///
/// The ten list-valued facets appear in [`FacetId::LIST`] in their canonical
/// order; `Category` is the single-valued grouping key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetId {
    Category,
    Brand,
    Series,
    TargetCustomer,
    ApplicableScenario,
    DecorativeAttribute,
    Material,
    Style,
    Specification,
    Color,
    Function,
}

impl FacetId {
    pub const LIST: [FacetId; 10] = [
        FacetId::Brand,
        FacetId::Series,
        FacetId::TargetCustomer,
        FacetId::ApplicableScenario,
        FacetId::DecorativeAttribute,
        FacetId::Material,
        FacetId::Style,
        FacetId::Specification,
        FacetId::Color,
        FacetId::Function,
    ];

    pub const ALL: [FacetId; 11] = [
        FacetId::Category,
        FacetId::Brand,
        FacetId::Series,
        FacetId::TargetCustomer,
        FacetId::ApplicableScenario,
        FacetId::DecorativeAttribute,
        FacetId::Material,
        FacetId::Style,
        FacetId::Specification,
        FacetId::Color,
        FacetId::Function,
    ];

    /// Stable snake_case name, identical to the catalog file field name.
    pub fn as_str(self) -> &'static str {
        match self {
            FacetId::Category => "category",
            FacetId::Brand => "brand",
            FacetId::Series => "series",
            FacetId::TargetCustomer => "target_customer",
            FacetId::ApplicableScenario => "applicable_scenario",
            FacetId::DecorativeAttribute => "decorative_attribute",
            FacetId::Material => "material",
            FacetId::Style => "style",
            FacetId::Specification => "specification",
            FacetId::Color => "color",
            FacetId::Function => "function",
        }
    }

    /// Human-readable label, e.g. "target customer".
    pub fn label(self) -> &'static str {
        match self {
            FacetId::Category => "category",
            FacetId::Brand => "brand",
            FacetId::Series => "series",
            FacetId::TargetCustomer => "target customer",
            FacetId::ApplicableScenario => "applicable scenario",
            FacetId::DecorativeAttribute => "decorative attribute",
            FacetId::Material => "material",
            FacetId::Style => "style",
            FacetId::Specification => "specification",
            FacetId::Color => "color",
            FacetId::Function => "function",
        }
    }
}

impl fmt::Display for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown facet `{0}`")]
pub struct UnknownFacet(pub String);

impl FromStr for FacetId {
    type Err = UnknownFacet;

    /// Accepts the snake_case name or the spaced label, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        FacetId::ALL
            .into_iter()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| UnknownFacet(s.to_string()))
    }
}

/// One catalog document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductItem {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub category: String,
    #[serde(default)]
    pub brand: Vec<String>,
    #[serde(default)]
    pub series: Vec<String>,
    #[serde(default)]
    pub target_customer: Vec<String>,
    #[serde(default)]
    pub applicable_scenario: Vec<String>,
    #[serde(default)]
    pub decorative_attribute: Vec<String>,
    #[serde(default)]
    pub material: Vec<String>,
    #[serde(default)]
    pub style: Vec<String>,
    #[serde(default)]
    pub specification: Vec<String>,
    #[serde(default)]
    pub color: Vec<String>,
    #[serde(default)]
    pub function: Vec<String>,
}

impl ProductItem {
    /// An item with the given id, title, and category and no facet values.
    pub fn new(id: impl Into<String>, title: impl Into<String>, category: impl Into<String>) -> Self {
        ProductItem {
            id: id.into(),
            title: title.into(),
            category: category.into(),
            brand: Vec::new(),
            series: Vec::new(),
            target_customer: Vec::new(),
            applicable_scenario: Vec::new(),
            decorative_attribute: Vec::new(),
            material: Vec::new(),
            style: Vec::new(),
            specification: Vec::new(),
            color: Vec::new(),
            function: Vec::new(),
        }
    }

    /// Builder-style setter for one list facet.
    pub fn with(mut self, facet: FacetId, values: &[&str]) -> Self {
        *self.facet_mut(facet) = values.iter().map(|v| v.to_string()).collect();
        self
    }

    /// Values of a facet; `Category` yields the single category string.
    pub fn values(&self, facet: FacetId) -> &[String] {
        match facet {
            FacetId::Category => std::slice::from_ref(&self.category),
            FacetId::Brand => &self.brand,
            FacetId::Series => &self.series,
            FacetId::TargetCustomer => &self.target_customer,
            FacetId::ApplicableScenario => &self.applicable_scenario,
            FacetId::DecorativeAttribute => &self.decorative_attribute,
            FacetId::Material => &self.material,
            FacetId::Style => &self.style,
            FacetId::Specification => &self.specification,
            FacetId::Color => &self.color,
            FacetId::Function => &self.function,
        }
    }

    /// Mutable access to a list facet.
    ///
    /// # Panics
    /// On `FacetId::Category`, which is not list-valued.
    pub fn facet_mut(&mut self, facet: FacetId) -> &mut Vec<String> {
        match facet {
            FacetId::Category => panic!("category is not a list facet"),
            FacetId::Brand => &mut self.brand,
            FacetId::Series => &mut self.series,
            FacetId::TargetCustomer => &mut self.target_customer,
            FacetId::ApplicableScenario => &mut self.applicable_scenario,
            FacetId::DecorativeAttribute => &mut self.decorative_attribute,
            FacetId::Material => &mut self.material,
            FacetId::Style => &mut self.style,
            FacetId::Specification => &mut self.specification,
            FacetId::Color => &mut self.color,
            FacetId::Function => &mut self.function,
        }
    }

    /// Trims every field, drops empty facet values, removes case-insensitive
    /// duplicates and sorts each list by its folded form. Idempotent.
    pub fn normalize(&mut self) {
        self.id = self.id.trim().to_string();
        self.title = self.title.trim().to_string();
        self.category = self.category.trim().to_string();
        for facet in FacetId::LIST {
            let list = self.facet_mut(facet);
            let mut cleaned: Vec<String> = list
                .iter()
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            cleaned.sort_by(|a, b| fold(a).cmp(&fold(b)).then_with(|| a.cmp(b)));
            cleaned.dedup_by(|a, b| fold(a) == fold(b));
            *list = cleaned;
        }
    }
}

/// Matching key for facet values and categories: trimmed and lowercased.
pub fn fold(value: &str) -> String {
    value.trim().to_lowercase()
}
