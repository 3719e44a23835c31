use super::tokenize::tokenize;

/// Text encoder producing fixed-dimension vectors.
///
/// Implementations must be deterministic and return finite values.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f32>;
}

pub const DEFAULT_DIMENSION: usize = 256;

/// Signed feature hashing over token unigrams and per-token character
/// trigrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    /// # Panics
    /// If `dimension < 2`.
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 2, "embedding dimension must be at least 2");
        HashEmbedder { dimension }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(DEFAULT_DIMENSION)
    }
}

impl Embedder for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Vec<f32> {
        feature_hash_embed(text, self.dimension)
    }
}

fn fnv1a64(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn add_feature(v: &mut [f32], namespace: &[u8], feature: &[u8]) {
    let h = fnv1a64(&[namespace, feature]);
    let bucket = (h % v.len() as u64) as usize;
    v[bucket] += if h >> 63 == 1 { -1.0 } else { 1.0 };
}

/// Hashes the text's features into `dimension` signed buckets and
/// L2-normalizes the result. Text with no tokens maps to the zero vector.
///
/// # Panics
/// If `dimension < 2`.
pub fn feature_hash_embed(text: &str, dimension: usize) -> Vec<f32> {
    assert!(dimension >= 2, "embedding dimension must be at least 2");
    let mut v = vec![0.0f32; dimension];
    for token in tokenize(text) {
        add_feature(&mut v, b"u:", token.as_bytes());
        let padded: Vec<char> = std::iter::once('^').chain(token.chars()).chain(std::iter::once('$')).collect();
        let mut buf = [0u8; 12];
        for tri in padded.windows(3) {
            let mut len = 0;
            for c in tri {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            add_feature(&mut v, b"t:", &buf[..len]);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}
