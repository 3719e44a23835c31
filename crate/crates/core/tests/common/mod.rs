//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the library's scoring code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use prodclarify_core::catalog::{FacetId, ProductItem};
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: &[&str] = &[
    "red", "blue", "green", "canvas", "rubber", "mesh", "shoe", "boot", "pants", "shirt", "casual", "sport", "slim",
    "loose", "cotton", "wool", "summer", "winter", "anti", "slip", "light", "heavy", "women", "men", "kids", "round",
    "leopard", "print", "khaki", "black",
];

/// Documents of 1..=12 words drawn from [`WORDS`], with ids `d000`...
pub fn random_corpus(rng: &mut impl Rng, max_docs: usize) -> Vec<(String, String)> {
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(1..=12);
            let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
            (format!("d{i:03}"), words.join(" "))
        })
        .collect()
}

/// A query of 1..=4 words; roughly one in ten words is outside the corpus
/// vocabulary.
pub fn random_query(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(1..=4);
    (0..len)
        .map(|_| if rng.gen_bool(0.1) { "zzz".to_string() } else { WORDS.choose(rng).unwrap().to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Full sort by score descending then id ascending, cut to `k`.
pub fn sort_cut(mut scored: Vec<(String, f64)>, k: usize) -> Vec<(String, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Okapi BM25 (k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5)/(df + 0.5)))
/// by full scan. Texts must be lowercase words separated by spaces.
/// Documents sharing no term with the query are left out.
pub fn bm25_oracle(docs: &[(String, String)], query: &str, k: usize) -> Vec<(String, f64)> {
    let (k1, b) = (1.2f64, 0.75f64);
    let tokenized: Vec<Vec<&str>> = docs.iter().map(|(_, t)| t.split_whitespace().collect()).collect();
    let n = docs.len() as f64;
    let mut total_len = 0.0f64;
    for t in &tokenized {
        total_len += t.len() as f64;
    }
    let avgdl = total_len / n;
    let terms: BTreeSet<&str> = query.split_whitespace().collect();
    let mut out = Vec::new();
    for (i, (id, _)) in docs.iter().enumerate() {
        let mut score = 0.0f64;
        let mut matched = false;
        for term in &terms {
            let tf = tokenized[i].iter().filter(|w| *w == term).count();
            if tf == 0 {
                continue;
            }
            let df = tokenized.iter().filter(|d| d.contains(term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let tf = tf as f64;
            let dl = tokenized[i].len() as f64;
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            matched = true;
        }
        if matched {
            out.push((id.clone(), score));
        }
    }
    sort_cut(out, k)
}

pub fn cosine_oracle(a: &[f32], b: &[f32]) -> f64 {
    let mut ab = 0.0f64;
    let mut aa = 0.0f64;
    let mut bb = 0.0f64;
    for i in 0..a.len() {
        ab += a[i] as f64 * b[i] as f64;
    }
    for x in a {
        aa += *x as f64 * *x as f64;
    }
    for x in b {
        bb += *x as f64 * *x as f64;
    }
    let denom = aa.sqrt() * bb.sqrt();
    if denom == 0.0 {
        0.0
    } else {
        ab / denom
    }
}

pub fn dense_oracle(vectors: &[(String, Vec<f32>)], query: &[f32], k: usize) -> Vec<(String, f64)> {
    sort_cut(vectors.iter().map(|(id, v)| (id.clone(), cosine_oracle(query, v))).collect(), k)
}

/// Reciprocal rank fusion with each document's contributions added from
/// its best rank to its worst.
pub fn rrf_oracle(lists: &[Vec<String>], k_const: f64, k: usize) -> Vec<(String, f64)> {
    let mut ranks: HashMap<&str, Vec<usize>> = HashMap::new();
    for list in lists {
        for (i, id) in list.iter().enumerate() {
            ranks.entry(id).or_default().push(i + 1);
        }
    }
    let scored = ranks
        .into_iter()
        .map(|(id, mut r)| {
            r.sort();
            let mut s = 0.0f64;
            for rank in r {
                s += 1.0 / (k_const + rank as f64);
            }
            (id.to_string(), s)
        })
        .collect();
    sort_cut(scored, k)
}

/// Share of distinct query words present in the text.
pub fn overlap_oracle(query: &str, text: &str) -> f64 {
    let q: BTreeSet<&str> = query.split_whitespace().collect();
    if q.is_empty() {
        return 0.0;
    }
    let d: BTreeSet<&str> = text.split_whitespace().collect();
    q.iter().filter(|w| d.contains(*w)).count() as f64 / q.len() as f64
}

pub fn rerank_oracle(query: &str, candidates: &[String], texts: &HashMap<String, String>, k: usize) -> Vec<(String, f64)> {
    let top: Vec<(String, f64)> =
        candidates.iter().take(k).map(|id| (id.clone(), overlap_oracle(query, texts.get(id).map_or("", |s| s)))).collect();
    sort_cut(top, k)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 14695981039346656037u64;
    for b in bytes {
        h = (h ^ *b as u64).wrapping_mul(1099511628211);
    }
    h
}

/// Signed feature hashing of lowercase ASCII words: each word contributes
/// "u:<word>" and the trigrams of "^<word>$" under "t:".
pub fn hash_embed_oracle(text: &str, dim: usize) -> Vec<f32> {
    let mut v = vec![0.0f32; dim];
    let mut bump = |feature: String| {
        let h = fnv1a(feature.as_bytes());
        let slot = (h % dim as u64) as usize;
        if h & (1 << 63) != 0 {
            v[slot] -= 1.0;
        } else {
            v[slot] += 1.0;
        }
    };
    for word in text.split_whitespace() {
        bump(format!("u:{word}"));
        let padded = format!("^{word}$");
        let bytes = padded.as_bytes();
        for i in 0..bytes.len() - 2 {
            bump(format!("t:{}", std::str::from_utf8(&bytes[i..i + 3]).unwrap()));
        }
    }
    let norm: f32 = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Counts of each folded value per facet, by full scan.
pub fn facet_counts(items: &[&ProductItem]) -> BTreeMap<FacetId, BTreeMap<String, usize>> {
    let mut out: BTreeMap<FacetId, BTreeMap<String, usize>> = BTreeMap::new();
    for item in items {
        for facet in FacetId::LIST {
            let mut seen = BTreeSet::new();
            for v in item.values(facet) {
                let key = v.trim().to_lowercase();
                if seen.insert(key.clone()) {
                    *out.entry(facet).or_default().entry(key).or_default() += 1;
                }
            }
        }
    }
    out
}

/// A canvas shoe with fully populated facets, used across the suites.
pub fn leopard_canvas_shoe() -> ProductItem {
    ProductItem::new(
        "feiyue-8925",
        "Feiyue thick-soled canvas shoes for women, leopard print loafers, casual and versatile mantou shoes 8925",
        "Canvas shoes",
    )
    .with(FacetId::Brand, &["Feiyue"])
    .with(FacetId::TargetCustomer, &["Female", "18-40 years old", "Youth"])
    .with(FacetId::ApplicableScenario, &["Spring"])
    .with(
        FacetId::DecorativeAttribute,
        &["Shoe bottom", "Thick-soled", "Cross straps", "Coffee leopard print", "Shallow mouth", "Leopard print", "Round head"],
    )
    .with(FacetId::Material, &["Rubber", "Canvas"])
    .with(FacetId::Style, &["Lace-up", "Low-cut", "Leopard print", "Casual", "All-match"])
    .with(FacetId::Specification, &["EUR34", "EUR35", "EUR36", "EUR37", "EUR38"])
    .with(FacetId::Color, &["Purple", "Lake blue and orange", "Army green and white", "Pink", "Mixed colors"])
}

/// Random item with up to `max_values` values per facet from a small
/// shared pool, so candidate lists overlap item values often.
pub fn random_item(rng: &mut impl Rng, id: usize, max_values: usize) -> ProductItem {
    let mut item = ProductItem::new(format!("i{id:04}"), "item", "Shoes");
    for facet in FacetId::LIST {
        let n = rng.gen_range(0..=max_values);
        let vals: Vec<String> = (0..n).map(|_| format!("{} {}", facet.as_str(), rng.gen_range(0..8))).collect();
        let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
        item = item.with(facet, &refs);
    }
    item.normalize();
    item
}
