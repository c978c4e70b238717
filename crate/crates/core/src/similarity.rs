//! String similarity measures on a 0..=100 scale (100 = perfect match) and the
//! embedding provider abstraction used by the semantic measure.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EmbedError {
    /// Transient provider failure; the caller may retry.
    #[error("embedding provider unavailable (retryable): {0}")]
    Retryable(String),
    #[error("embedding provider failed: {0}")]
    Fatal(String),
}

/// Maps text to a fixed-dimension vector.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b, &mut Vec::new())
}

/// Two-row DP; `row` is scratch space reused across calls.
pub(crate) fn levenshtein_chars(a: &[char], b: &[char], row: &mut Vec<usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    row.clear();
    row.extend(0..=b.len());
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

pub(crate) fn ratio_from_distance(dist: usize, len_a: usize, len_b: usize) -> f64 {
    let max = len_a.max(len_b);
    if max == 0 {
        return 100.0;
    }
    (1.0 - dist as f64 / max as f64) * 100.0
}

/// `(1 − dist / max(|a|, |b|)) · 100`; two empty strings score 100.
pub fn lev_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ratio_from_distance(levenshtein_chars(&a, &b, &mut Vec::new()), a.len(), b.len())
}

/// Token-sort form of a string: lowercased, non-alphanumerics replaced by spaces,
/// whitespace tokens sorted and re-joined with single spaces.
pub fn token_sort_key(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_lowercase().next().unwrap_or(c) } else { ' ' })
        .collect();
    let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

/// Token-sort ratio: [`lev_similarity`] of the two [`token_sort_key`]s.
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    lev_similarity(&token_sort_key(a), &token_sort_key(b))
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// `max(0, cos) · 100` of two precomputed embeddings, clamped to 100.
pub fn sem_score(a: &[f64], b: &[f64]) -> f64 {
    (cosine(a, b).max(0.0) * 100.0).min(100.0)
}

/// `max(0, cosine(emb(a), emb(b))) · 100`. Identical strings score exactly 100.
pub fn sem_similarity(a: &str, b: &str, embedder: &dyn EmbeddingProvider) -> Result<f64, EmbedError> {
    if a == b {
        return Ok(100.0);
    }
    Ok(sem_score(&embedder.embed(a)?, &embedder.embed(b)?))
}

/// Deterministic character-trigram embedder: lowercased text padded with spaces, each
/// trigram hashed (FNV-1a) into one of `dimension` buckets.
#[derive(Debug, Clone)]
pub struct TrigramEmbedder {
    dimension: usize,
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        TrigramEmbedder { dimension: 2048 }
    }
}

impl TrigramEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        TrigramEmbedder { dimension }
    }
}

fn fnv1a(chars: &[char]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in chars {
        for b in (*c as u32).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

impl EmbeddingProvider for TrigramEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let mut v = vec![0.0; self.dimension];
        let norm = crate::model::collapse_whitespace(&text.to_lowercase());
        if norm.is_empty() {
            return Ok(v);
        }
        let padded: Vec<char> = format!("  {norm} ").chars().collect();
        for w in padded.windows(3) {
            v[(fnv1a(w) % self.dimension as u64) as usize] += 1.0;
        }
        Ok(v)
    }
}

/// Precomputed vectors keyed by exact text, e.g. exported from an external sentence
/// encoder. Texts without a vector get `fallback`, or an error when there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEmbedder {
    pub vectors: std::collections::HashMap<String, Vec<f64>>,
    #[serde(default)]
    pub fallback: Option<Vec<f64>>,
}

impl TableEmbedder {
    pub fn load(path: &std::path::Path) -> Result<Self, EmbedError> {
        let text = std::fs::read_to_string(path).map_err(|e| EmbedError::Fatal(format!("{}: {e}", path.display())))?;
        let t: TableEmbedder =
            serde_json::from_str(&text).map_err(|e| EmbedError::Fatal(format!("{}: {e}", path.display())))?;
        let dims: std::collections::BTreeSet<usize> =
            t.vectors.values().chain(&t.fallback).map(Vec::len).collect();
        if dims.len() > 1 {
            return Err(EmbedError::Fatal(format!("{}: mixed vector dimensions {dims:?}", path.display())));
        }
        Ok(t)
    }
}

impl EmbeddingProvider for TableEmbedder {
    fn dimension(&self) -> usize {
        self.vectors.values().chain(&self.fallback).next().map_or(0, Vec::len)
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        self.vectors
            .get(text)
            .or(self.fallback.as_ref())
            .cloned()
            .ok_or_else(|| EmbedError::Fatal(format!("no vector for {text:?}")))
    }
}

/// One of the alignment similarity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Lev,
    Fuzzy,
    Sem,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Lev => "lev",
            Measure::Fuzzy => "fuzzy",
            Measure::Sem => "sem",
        }
    }

    /// Score a string pair directly; `Sem` needs an embedder.
    pub fn score(
        self,
        a: &str,
        b: &str,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<f64, EmbedError> {
        match self {
            Measure::Lev => Ok(lev_similarity(a, b)),
            Measure::Fuzzy => Ok(fuzzy_similarity(a, b)),
            Measure::Sem => sem_similarity(a, b, embedder),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "lev" => Ok(Measure::Lev),
            "fuzzy" => Ok(Measure::Fuzzy),
            "sem" => Ok(Measure::Sem),
            other => Err(format!("unknown measure `{other}` (expected lev, fuzzy or sem)")),
        }
    }
}

/// Parse a comma-separated measure list such as `lev,fuzzy,sem`.
pub fn parse_measures(list: &str) -> Result<Vec<Measure>, String> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

pub fn default_embedder() -> Arc<dyn EmbeddingProvider> {
    Arc::new(TrigramEmbedder::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Table(Vec<(&'static str, Vec<f64>)>);
    impl EmbeddingProvider for Table {
        fn dimension(&self) -> usize {
            2
        }
        fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
            self.0
                .iter()
                .find(|(t, _)| *t == text)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| EmbedError::Retryable(format!("no vector for {text}")))
        }
    }

    #[test]
    fn lev_examples() {
        assert_eq!(lev_similarity("abc", "abc"), 100.0);
        assert!((lev_similarity("kitten", "sitting") - 57.142857).abs() < 0.01);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(lev_similarity("a", ""), 0.0);
        assert_eq!(lev_similarity("", ""), 100.0);
        // counts characters, not bytes
        assert_eq!(levenshtein("é", "e"), 1);
    }

    #[test]
    fn fuzzy_examples() {
        assert_eq!(fuzzy_similarity("b a", "a b"), 100.0);
        assert_eq!(fuzzy_similarity("the cat sat", "sat the cat"), 100.0);
        assert!((fuzzy_similarity("cat", "dog") - lev_similarity("cat", "dog")).abs() < 0.01);
        assert!(fuzzy_similarity("cat", "dog").abs() < 0.01);
    }

    #[test]
    fn sem_examples() {
        let t = Table(vec![("x", vec![1.0, 0.0]), ("y", vec![0.0, 1.0]), ("z", vec![0.5, 0.75f64.sqrt()])]);
        assert_eq!(sem_similarity("x", "x", &t).unwrap(), 100.0);
        assert_eq!(sem_similarity("x", "y", &t).unwrap(), 0.0);
        assert!((sem_similarity("x", "z", &t).unwrap() - 50.0).abs() < 1e-9);
        assert!(matches!(sem_similarity("x", "missing", &t), Err(EmbedError::Retryable(_))));
    }

    #[test]
    fn trigram_embedder_is_deterministic() {
        let e = TrigramEmbedder::default();
        let a = e.embed("The model works well.").unwrap();
        assert_eq!(a, e.embed("The model works well.").unwrap());
        assert_eq!(a.len(), 2048);
        assert!(sem_score(&a, &e.embed("the model works well").unwrap()) > 80.0);
        assert!(sem_score(&a, &e.embed("Completely unrelated text here.").unwrap()) < 40.0);
    }

    #[test]
    fn measure_parsing() {
        assert_eq!(parse_measures("lev,fuzzy,sem").unwrap(), vec![Measure::Lev, Measure::Fuzzy, Measure::Sem]);
        assert!(parse_measures("lev,bleu").is_err());
    }

    proptest! {
        #[test]
        fn measure_contracts(a in "[a-c ]{0,12}", b in "[a-c ]{0,12}") {
            let e = TrigramEmbedder::new(64);
            for m in [Measure::Lev, Measure::Fuzzy, Measure::Sem] {
                let ab = m.score(&a, &b, &e).unwrap();
                let ba = m.score(&b, &a, &e).unwrap();
                prop_assert!((0.0..=100.0).contains(&ab));
                prop_assert!((ab - ba).abs() < 1e-9);
                prop_assert_eq!(m.score(&a, &a, &e).unwrap(), 100.0);
            }
        }
    }
}
