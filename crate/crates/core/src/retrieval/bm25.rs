use std::collections::HashMap;

use super::ranked::RankedList;
use super::tokenize::tokenize;
use super::RetrievalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Inverted index with Okapi BM25 scoring.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    terms: HashMap<String, usize>,
    /// Per term: (document index, term frequency), document index ascending.
    postings: Vec<Vec<(u32, u32)>>,
    doc_ids: Vec<String>,
    doc_len: Vec<u32>,
    avgdl: f64,
}

impl Bm25Index {
    pub fn build<I, S, T>(docs: I) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        Self::build_with(docs, Bm25Params::default())
    }

    pub fn build_with<I, S, T>(docs: I, params: Bm25Params) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut terms: HashMap<String, usize> = HashMap::new();
        let mut postings: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut doc_ids = Vec::new();
        let mut doc_len = Vec::new();

        for (doc_idx, (id, text)) in docs.into_iter().enumerate() {
            let tokens = tokenize(text.as_ref());
            doc_ids.push(id.into());
            doc_len.push(tokens.len() as u32);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for token in tokens {
                *tf.entry(token).or_default() += 1;
            }
            for (token, count) in tf {
                let next = postings.len();
                let term = *terms.entry(token).or_insert(next);
                if term == next {
                    postings.push(Vec::new());
                }
                postings[term].push((doc_idx as u32, count));
            }
        }
        if doc_ids.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let avgdl = doc_len.iter().map(|&l| l as f64).sum::<f64>() / doc_ids.len() as f64;
        Ok(Bm25Index { params, terms, postings, doc_ids, doc_len, avgdl })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    /// Indexed terms, sorted.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.terms.keys().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.terms.get(term).map_or(0, |&t| self.postings[t].len())
    }

    /// (document id, term frequency) pairs for `term` in index order.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.terms.get(term).map_or_else(Vec::new, |&t| {
            self.postings[t].iter().map(|&(d, tf)| (self.doc_ids[d as usize].as_str(), tf)).collect()
        })
    }

    /// Smoothed inverse document frequency, always positive.
    pub fn idf(&self, df: usize) -> f64 {
        let n = self.doc_count() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Top-`k` documents by BM25 over the distinct query tokens. Documents
    /// sharing no token with the query are omitted.
    pub fn search(&self, query: &str, k: usize) -> RankedList {
        let mut query_terms = tokenize(query);
        query_terms.sort_unstable();
        query_terms.dedup();

        let Bm25Params { k1, b } = self.params;
        let mut acc = vec![0.0f64; self.doc_count()];
        let mut touched = vec![false; self.doc_count()];
        for term in &query_terms {
            let Some(&t) = self.terms.get(term) else { continue };
            let plist = &self.postings[t];
            let idf = self.idf(plist.len());
            for &(d, tf) in plist {
                let d = d as usize;
                let tf = tf as f64;
                let dl = self.doc_len[d] as f64;
                acc[d] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / self.avgdl));
                touched[d] = true;
            }
        }
        RankedList::from_scores(
            acc.into_iter()
                .enumerate()
                .filter(|&(d, score)| touched[d] && score > 0.0)
                .map(|(d, score)| (self.doc_ids[d].clone(), score)),
            k,
        )
    }
}
