use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::item::{FacetId, ProductItem};
use super::{Catalog, CatalogError};

const CATEGORY_NAMES: [&str; 20] = [
    "Canvas shoes",
    "Casual pants",
    "Sports shoes",
    "Backpacks",
    "Dresses",
    "Jackets",
    "Sneakers",
    "Skirts",
    "Hoodies",
    "Jeans",
    "Sandals",
    "Watches",
    "Sunglasses",
    "Hats",
    "Scarves",
    "Boots",
    "Handbags",
    "Socks",
    "Gloves",
    "Sweaters",
];

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const SYLLABLES: usize = 14 * 5;
const WORD_SPACE: usize = SYLLABLES * SYLLABLES * SYLLABLES;
// Multiplier coprime with WORD_SPACE (2^3 * 5^3 * 7^3), so the mapping is a bijection.
const SCRAMBLE: usize = 7919;

const MAX_VALUES_PER_ITEM: usize = 3;

/// Shape of a generated catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub categories: usize,
    pub items_per_category: usize,
    pub values_per_facet: usize,
}

impl SyntheticSpec {
    pub fn new(categories: usize, items_per_category: usize, values_per_facet: usize) -> Self {
        SyntheticSpec { categories, items_per_category, values_per_facet }
    }
}

impl std::str::FromStr for SyntheticSpec {
    type Err = CatalogError;

    /// Parses `CATEGORIESxITEMSxVALUES`, e.g. `4x500x8`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
        let bad = || CatalogError::InvalidSpec(format!("expected CATEGORIESxITEMSxVALUES, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
        let nums = nums.map_err(|_| bad())?;
        Ok(SyntheticSpec::new(nums[0], nums[1], nums[2]))
    }
}

/// Number of distinct non-empty value subsets one facet can take.
fn subsets_per_facet(values: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for j in 1..=MAX_VALUES_PER_ITEM.min(values) {
        binom = binom * (values + 1 - j) as u128 / j as u128;
        total += binom;
    }
    total
}

fn assignment_space(values: usize) -> u128 {
    subsets_per_facet(values).saturating_pow(FacetId::LIST.len() as u32)
}

fn category_name(idx: usize) -> String {
    CATEGORY_NAMES.get(idx).map(|s| s.to_string()).unwrap_or_else(|| format!("Category {}", idx + 1))
}

/// Pronounceable pseudo-word, unique for each `n < WORD_SPACE`.
fn vocab_word(n: usize) -> String {
    let mut code = (n * SCRAMBLE + 101) % WORD_SPACE;
    let mut word = String::with_capacity(6);
    for _ in 0..3 {
        let syl = code % SYLLABLES;
        code /= SYLLABLES;
        word.push(CONSONANTS[syl / VOWELS.len()] as char);
        word.push(VOWELS[syl % VOWELS.len()] as char);
    }
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => word,
    }
}

/// Deterministic catalog whose items within a category never share a full
/// facet assignment. Vocabularies are disjoint across categories and facets.
pub fn generate_synthetic_catalog(seed: u64, spec: SyntheticSpec) -> Result<Catalog, CatalogError> {
    if spec.categories == 0 || spec.items_per_category == 0 || spec.values_per_facet == 0 {
        return Err(CatalogError::InvalidSpec("all counts must be at least 1".into()));
    }
    let words_needed = spec.categories * FacetId::LIST.len() * spec.values_per_facet;
    if words_needed > WORD_SPACE {
        return Err(CatalogError::InvalidSpec(format!(
            "needs {words_needed} vocabulary words, at most {WORD_SPACE} available"
        )));
    }
    if (spec.items_per_category as u128) > assignment_space(spec.values_per_facet) {
        let minimum = (1..)
            .find(|&v| assignment_space(v) >= spec.items_per_category as u128)
            .unwrap_or(usize::MAX);
        return Err(CatalogError::ValueSpaceTooSmall {
            message: format!(
                "{} items per category need at least {minimum} values per facet, got {}",
                spec.items_per_category, spec.values_per_facet
            ),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(spec.categories * spec.items_per_category);
    let max_per_item = MAX_VALUES_PER_ITEM.min(spec.values_per_facet);

    for cat in 0..spec.categories {
        let category = category_name(cat);
        let vocab: Vec<Vec<String>> = (0..FacetId::LIST.len())
            .map(|f| {
                (0..spec.values_per_facet)
                    .map(|v| vocab_word((cat * FacetId::LIST.len() + f) * spec.values_per_facet + v))
                    .collect()
            })
            .collect();

        let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::with_capacity(spec.items_per_category);
        for i in 0..spec.items_per_category {
            let assignment = loop {
                let draw: Vec<Vec<usize>> = (0..FacetId::LIST.len())
                    .map(|_| {
                        let count = rng.gen_range(1..=max_per_item);
                        let mut picked = index::sample(&mut rng, spec.values_per_facet, count).into_vec();
                        picked.sort_unstable();
                        picked
                    })
                    .collect();
                if seen.insert(draw.clone()) {
                    break draw;
                }
            };

            let mut item = ProductItem::new(format!("c{cat:02}-{i:05}"), String::new(), category.clone());
            let mut title = vec![category.clone()];
            for (f, facet) in FacetId::LIST.into_iter().enumerate() {
                let values: Vec<String> = assignment[f].iter().map(|&v| vocab[f][v].clone()).collect();
                title.extend(values.iter().cloned());
                *item.facet_mut(facet) = values;
            }
            item.title = title.join(" ");
            items.push(item);
        }
    }
    Catalog::from_items(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl(cat: &Catalog) -> Vec<u8> {
        let mut buf = Vec::new();
        cat.write_jsonl(&mut buf).unwrap();
        buf
    }

    #[test]
    fn small_spec_counts_and_determinism() {
        let spec = SyntheticSpec::new(2, 3, 4);
        let a = generate_synthetic_catalog(1, spec).unwrap();
        let b = generate_synthetic_catalog(1, spec).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a.category_count(), 2);
        assert_eq!(jsonl(&a), jsonl(&b));
        let c = generate_synthetic_catalog(2, spec).unwrap();
        assert_ne!(jsonl(&a), jsonl(&c));
    }

    #[test]
    fn pigeonhole_error() {
        let err = generate_synthetic_catalog(1, SyntheticSpec::new(1, 2, 1)).unwrap_err();
        match err {
            CatalogError::ValueSpaceTooSmall { message } => assert!(message.contains("at least 2")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(generate_synthetic_catalog(1, SyntheticSpec::new(1, 1, 1)).is_ok());
    }

    #[test]
    fn items_are_separable_and_well_formed() {
        let cat = generate_synthetic_catalog(7, SyntheticSpec::new(3, 200, 3)).unwrap();
        let mut seen = HashSet::new();
        for item in cat.items() {
            for facet in FacetId::LIST {
                let n = item.values(facet).len();
                assert!((1..=3).contains(&n));
            }
            let key: Vec<Vec<String>> = FacetId::ALL.iter().map(|&f| item.values(f).to_vec()).collect();
            assert!(seen.insert(key), "duplicate assignment for {}", item.id);
            assert!(item.title.starts_with(&item.category));
        }
    }

    #[test]
    fn vocabulary_words_are_unique() {
        let words: HashSet<String> = (0..5000).map(vocab_word).collect();
        assert_eq!(words.len(), 5000);
    }

    #[test]
    fn parses_shape_strings() {
        assert_eq!("4x500x8".parse::<SyntheticSpec>().unwrap(), SyntheticSpec::new(4, 500, 8));
        assert!("4x500".parse::<SyntheticSpec>().is_err());
    }
}
