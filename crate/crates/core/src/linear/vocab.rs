use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const UNK: &str = "<unk>";
pub const UNK_INDEX: usize = 0;

/// Token to dense index map. Index 0 is reserved for unknown tokens; the
/// rest follow byte order of the normalized token, so the same multiset
/// of training tokens always yields the same vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    min_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    min_count: usize,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        Vocabulary::from_tokens(r.tokens, r.min_count)
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            tokens: v.tokens,
            min_count: v.min_count,
        }
    }
}

pub fn normalize_token(tok: &str) -> String {
    tok.to_lowercase()
}

pub fn build_vocab<'a, I>(tokens: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(normalize_token(t)).or_default() += 1;
    }
    let kept = counts
        .into_iter()
        .filter(|(t, c)| *c >= min_count.max(1) && t != UNK)
        .map(|(t, _)| t);
    Vocabulary::from_tokens(
        std::iter::once(UNK.to_owned()).chain(kept).collect(),
        min_count,
    )
}

impl Vocabulary {
    fn from_tokens(tokens: Vec<String>, min_count: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            index,
            min_count,
        }
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, tok: &str) -> usize {
        self.index
            .get(&normalize_token(tok))
            .copied()
            .unwrap_or(UNK_INDEX)
    }

    pub fn token(&self, i: usize) -> Option<&str> {
        self.tokens.get(i).map(String::as_str)
    }

    pub fn contains(&self, tok: &str) -> bool {
        self.index.contains_key(&normalize_token(tok))
    }

    /// SHA-256 over the token list, used to check saved models.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}
