use super::embed::Embedder;
use super::ranked::RankedList;
use super::RetrievalError;

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

/// Exhaustive-scan vector index.
#[derive(Debug, Clone)]
pub struct DenseIndex {
    dimension: usize,
    ids: Vec<String>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
}

impl DenseIndex {
    /// Embeds every document with `embedder`.
    pub fn build<I, S, T>(docs: I, embedder: &dyn Embedder) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let dimension = embedder.dimension();
        let mut index = DenseIndex { dimension, ids: Vec::new(), vectors: Vec::new(), norms: Vec::new() };
        for (id, text) in docs {
            let v = embedder.embed(text.as_ref());
            index.push(id.into(), v)?;
        }
        if index.ids.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        Ok(index)
    }

    /// Index over precomputed vectors.
    pub fn from_vectors(dimension: usize, docs: impl IntoIterator<Item = (String, Vec<f32>)>) -> Result<Self, RetrievalError> {
        let mut index = DenseIndex { dimension, ids: Vec::new(), vectors: Vec::new(), norms: Vec::new() };
        for (id, v) in docs {
            index.push(id, v)?;
        }
        Ok(index)
    }

    fn push(&mut self, id: String, v: Vec<f32>) -> Result<(), RetrievalError> {
        if v.len() != self.dimension {
            return Err(RetrievalError::DimensionMismatch { expected: self.dimension, got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(RetrievalError::NonFinite(id));
        }
        self.norms.push(norm(&v));
        self.vectors.extend_from_slice(&v);
        self.ids.push(id);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Embeds `query` and ranks every document by cosine similarity.
    pub fn search(&self, query: &str, k: usize, embedder: &dyn Embedder) -> Result<RankedList, RetrievalError> {
        if embedder.dimension() != self.dimension {
            return Err(RetrievalError::DimensionMismatch { expected: self.dimension, got: embedder.dimension() });
        }
        self.search_vector(&embedder.embed(query), k)
    }

    pub fn search_vector(&self, query: &[f32], k: usize) -> Result<RankedList, RetrievalError> {
        if query.len() != self.dimension {
            return Err(RetrievalError::DimensionMismatch { expected: self.dimension, got: query.len() });
        }
        let qnorm = norm(query);
        let scores = self.ids.iter().enumerate().map(|(i, id)| {
            let v = &self.vectors[i * self.dimension..(i + 1) * self.dimension];
            let denom = qnorm * self.norms[i];
            let score = if denom == 0.0 { 0.0 } else { dot(query, v) / denom };
            (id.clone(), score)
        });
        Ok(RankedList::from_scores(scores, k))
    }
}
