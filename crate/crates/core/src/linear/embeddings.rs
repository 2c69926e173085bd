//! Word vectors in the common text format: a `<count> <dim>` header line,
//! then one `<token> <dim floats>` line per entry.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header line {0:?}")]
    Header(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("header announces {expected} vectors, file has {found}")]
    Count { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, v: Vec<f64>) -> Result<(), EmbeddingError> {
        if v.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                line: 0,
                expected: self.dim,
                found: v.len(),
            });
        }
        self.vectors.insert(key.into(), v);
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let mut parts = header.split_whitespace();
        let parse_usize = |s: Option<&str>| s.and_then(|x| x.parse::<usize>().ok());
        let (n, dim) = match (
            parse_usize(parts.next()),
            parse_usize(parts.next()),
            parts.next(),
        ) {
            (Some(n), Some(d), None) if d > 0 => (n, d),
            _ => return Err(EmbeddingError::Header(header)),
        };
        let mut table = EmbeddingTable::new(dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line_no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default().to_owned();
            let v = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| EmbeddingError::Parse {
                        line: line_no,
                        reason: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line: line_no,
                    expected: dim,
                    found: v.len(),
                });
            }
            table.vectors.insert(key, v);
        }
        if table.vectors.len() != n {
            return Err(EmbeddingError::Count {
                expected: n,
                found: table.vectors.len(),
            });
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors
            .get(key)
            .or_else(|| self.vectors.get(&key.to_lowercase()))
            .map(Vec::as_slice)
    }

    /// The vector for `key`, or zeros.
    pub fn lookup(&self, key: &str) -> Vec<f64> {
        self.get(key)
            .map_or_else(|| vec![0.0; self.dim], <[f64]>::to_vec)
    }

    /// Vector stored under the tweet id if present, otherwise the mean of
    /// the token vectors (zeros for unknown tokens).
    pub fn tweet_vector(&self, tweet_id: &str, tokens: &[String]) -> Vec<f64> {
        if let Some(v) = self.vectors.get(tweet_id) {
            return v.clone();
        }
        let mut mean = vec![0.0; self.dim];
        if tokens.is_empty() {
            return mean;
        }
        for t in tokens {
            if let Some(v) = self.get(t) {
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x;
                }
            }
        }
        let n = tokens.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_text_format() {
        let src = "2 3\nwall 0.1 0.2 0.3\nWALLS 1 2 3\n";
        let t = EmbeddingTable::read_text(src.as_bytes()).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.lookup("wall"), vec![0.1, 0.2, 0.3]);
        assert_eq!(t.lookup("missing"), vec![0.0; 3]);
        let mean = t.tweet_vector("id", &["wall".into(), "x".into()]);
        assert_eq!(mean, vec![0.05, 0.1, 0.15]);
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = EmbeddingTable::read_text("2 3\na 1 2 3\nb 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            EmbeddingError::DimensionMismatch {
                line: 3,
                expected: 3,
                found: 2
            }
        ));
        assert!(matches!(
            EmbeddingTable::read_text("x y\n".as_bytes()),
            Err(EmbeddingError::Header(_))
        ));
        assert!(matches!(
            EmbeddingTable::read_text("3 1\na 1\n".as_bytes()),
            Err(EmbeddingError::Count {
                expected: 3,
                found: 1
            })
        ));
    }
}
