use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embeddings::EmbeddingTable;
use super::vocab::Vocabulary;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Sorted `(column, value)` pairs without duplicate columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec(pub Vec<(usize, f64)>);

impl SparseVec {
    fn from_unsorted(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => out.push((c, v)),
            }
        }
        out.retain(|e| e.1 != 0.0);
        SparseVec(out)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|e| e.0).collect()
    }

    pub fn get(&self, col: usize) -> f64 {
        self.0
            .binary_search_by_key(&col, |e| e.0)
            .map_or(0.0, |i| self.0[i].1)
    }
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    n_cols: usize,
}

impl SparseMatrix {
    pub fn new(n_cols: usize) -> Self {
        SparseMatrix {
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            n_cols,
        }
    }

    pub fn from_rows(rows: &[SparseVec], n_cols: usize) -> Self {
        let mut m = SparseMatrix::new(n_cols);
        for r in rows {
            m.push(r);
        }
        m
    }

    /// Dense rows, for small tests.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let sparse: Vec<SparseVec> = rows
            .iter()
            .map(|r| SparseVec::from_unsorted(r.iter().copied().enumerate().collect()))
            .collect();
        SparseMatrix::from_rows(&sparse, n_cols)
    }

    pub fn push(&mut self, row: &SparseVec) {
        for &(c, v) in &row.0 {
            assert!(c < self.n_cols, "column {c} out of range {}", self.n_cols);
            self.indices.push(c);
            self.values.push(v);
        }
        self.indptr.push(self.indices.len());
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[s..e]
            .iter()
            .copied()
            .zip(self.values[s..e].iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Context tokens on each side for token tasks.
    pub window: usize,
    /// Number of conditioning components.
    pub n_conditioning: usize,
    /// Embedding dimension, 0 when no embeddings are used.
    pub embedding_dim: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: 2,
            n_conditioning: 0,
            embedding_dim: 0,
        }
    }
}

/// Maps tokens and tweets to sparse feature vectors.
///
/// Token layout: a bag-of-words block per window position, the current
/// token's embedding, one indicator per window position and conditioning
/// component, and one per conditioning component flagging that the tweet
/// contains it anywhere.
///
/// Tweet layout: bag-of-words counts, the mean embedding, and one
/// bag-of-words block per conditioning component restricted to the tokens
/// inside that component.
#[derive(Debug, Clone)]
pub struct Featurizer {
    vocab: Vocabulary,
    config: FeatureConfig,
    embeddings: Option<Arc<EmbeddingTable>>,
}

impl Featurizer {
    pub fn new(
        vocab: Vocabulary,
        mut config: FeatureConfig,
        embeddings: Option<Arc<EmbeddingTable>>,
    ) -> Result<Self, FeatureError> {
        match &embeddings {
            Some(e) if config.embedding_dim != 0 && config.embedding_dim != e.dim() => {
                return Err(FeatureError::DimensionMismatch {
                    what: "embeddings",
                    expected: config.embedding_dim,
                    found: e.dim(),
                })
            }
            Some(e) => config.embedding_dim = e.dim(),
            None => config.embedding_dim = 0,
        }
        Ok(Featurizer {
            vocab,
            config,
            embeddings,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    fn positions(&self) -> usize {
        2 * self.config.window + 1
    }

    pub fn token_dim(&self) -> usize {
        let v = self.vocab.len();
        let k = self.config.n_conditioning;
        self.positions() * v + self.config.embedding_dim + self.positions() * k + k
    }

    pub fn tweet_dim(&self) -> usize {
        let v = self.vocab.len();
        v + self.config.embedding_dim + self.config.n_conditioning * v
    }

    /// Features of token `i`. `indicators[j][k]` marks token j inside the
    /// k-th conditioning component.
    pub fn token_features(
        &self,
        tokens: &[String],
        indicators: &[Vec<u8>],
        i: usize,
    ) -> Result<SparseVec, FeatureError> {
        let k = self.config.n_conditioning;
        if let Some(row) = indicators.iter().find(|r| r.len() != k) {
            return Err(FeatureError::DimensionMismatch {
                what: "conditioning indicators",
                expected: k,
                found: row.len(),
            });
        }
        let v = self.vocab.len();
        let w = self.config.window as isize;
        let mut entries = Vec::new();
        let ind_base = self.positions() * v + self.config.embedding_dim;
        for (p, off) in (-w..=w).enumerate() {
            let j = i as isize + off;
            if j < 0 || j as usize >= tokens.len() {
                continue;
            }
            let j = j as usize;
            entries.push((p * v + self.vocab.get(&tokens[j]), 1.0));
            if k > 0 {
                for (c, &on) in indicators[j].iter().enumerate() {
                    if on != 0 {
                        entries.push((ind_base + p * k + c, 1.0));
                    }
                }
            }
        }
        if let Some(e) = &self.embeddings {
            let base = self.positions() * v;
            for (d, x) in e.lookup(&tokens[i]).into_iter().enumerate() {
                entries.push((base + d, x));
            }
        }
        let presence_base = ind_base + self.positions() * k;
        for c in 0..k {
            if indicators.iter().any(|r| r[c] != 0) {
                entries.push((presence_base + c, 1.0));
            }
        }
        Ok(SparseVec::from_unsorted(entries))
    }

    /// Features of a whole tweet; `conditioned[k]` holds the tokens inside
    /// the k-th conditioning component.
    pub fn tweet_features(
        &self,
        tweet_id: &str,
        tokens: &[String],
        conditioned: &[Vec<String>],
    ) -> Result<SparseVec, FeatureError> {
        let k = self.config.n_conditioning;
        if conditioned.len() != k {
            return Err(FeatureError::DimensionMismatch {
                what: "conditioning blocks",
                expected: k,
                found: conditioned.len(),
            });
        }
        let v = self.vocab.len();
        let mut entries: Vec<(usize, f64)> =
            tokens.iter().map(|t| (self.vocab.get(t), 1.0)).collect();
        if let Some(e) = &self.embeddings {
            for (d, x) in e.tweet_vector(tweet_id, tokens).into_iter().enumerate() {
                entries.push((v + d, x));
            }
        }
        let base = v + self.config.embedding_dim;
        for (c, toks) in conditioned.iter().enumerate() {
            entries.extend(toks.iter().map(|t| (base + c * v + self.vocab.get(t), 1.0)));
        }
        Ok(SparseVec::from_unsorted(entries))
    }
}
