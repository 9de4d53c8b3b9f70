//! Embedding table with a deterministic out-of-vocabulary policy.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hasher;

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::candidates::strip_sense_suffix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("line {line}: expected {expected} components")]
    Arity { line: usize, expected: usize },
    #[error("line {line}: duplicate key {key}")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: non-numeric component {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("vector for {key} has length {len}, table dim is {dim}")]
    Length { key: String, len: usize, dim: usize },
    #[error("no embedding rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(Self { dim, entries: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or replaces a vector.
    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(EmbeddingError::Length { key, len: vector.len(), dim: self.dim });
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Parses word2vec-style text: an optional `count dim` header, then
    /// one `key v1 .. vd` row per line.
    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let mut table: Option<Self> = None;
        let mut first = true;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let mut toks = raw.split_whitespace();
            let Some(key) = toks.next() else { continue };
            let rest: Vec<&str> = toks.collect();
            if first {
                first = false;
                if let ([dim], Ok(_)) = (&rest[..], key.parse::<usize>()) {
                    if let Ok(dim) = dim.parse::<usize>() {
                        table = Some(Self::new(dim)?);
                        continue;
                    }
                }
            }
            let t = match &mut table {
                Some(t) => t,
                None => table.insert(Self::new(rest.len())?),
            };
            if rest.len() != t.dim {
                return Err(EmbeddingError::Arity { line, expected: t.dim });
            }
            if t.entries.contains_key(key) {
                return Err(EmbeddingError::Duplicate { line, key: key.to_string() });
            }
            let vector = rest
                .iter()
                .map(|tok| match tok.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(EmbeddingError::NonNumeric { line, token: tok.to_string() }),
                })
                .collect::<Result<Vec<f64>, _>>()?;
            t.entries.insert(key.to_string(), vector);
        }
        table.ok_or(EmbeddingError::Empty)
    }

    /// Total lookup: exact key, sense-stripped lemma, lowercase lemma, mean
    /// of in-vocabulary hyphen/underscore parts, then a seeded unit vector.
    pub fn lookup(&self, key: &str) -> Cow<'_, [f64]> {
        if let Some(v) = self.resolve(key) {
            return v;
        }
        Cow::Owned(self.oov_vector(key))
    }

    /// Like [`lookup`](Self::lookup) but `None` where the OOV vector would be used.
    pub fn resolve(&self, key: &str) -> Option<Cow<'_, [f64]>> {
        if let Some(v) = self.get(key) {
            return Some(Cow::Borrowed(v));
        }
        let lemma = strip_sense_suffix(key);
        if let Some(v) = self.get(lemma) {
            return Some(Cow::Borrowed(v));
        }
        let lower = lemma.to_lowercase();
        if let Some(v) = self.get(&lower) {
            return Some(Cow::Borrowed(v));
        }
        let parts: Vec<&str> = lemma.split(['-', '_']).filter(|p| !p.is_empty()).collect();
        if parts.len() > 1 {
            let mut sum = vec![0.0; self.dim];
            let mut found = 0usize;
            for part in parts {
                let hit = self.get(part).or_else(|| self.get(&part.to_lowercase()));
                if let Some(v) = hit {
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += x;
                    }
                    found += 1;
                }
            }
            if found > 0 {
                let n = found as f64;
                sum.iter_mut().for_each(|s| *s /= n);
                return Some(Cow::Owned(sum));
            }
        }
        None
    }

    /// Deterministic unit-norm vector seeded by the FNV-1a hash of `key`.
    pub fn oov_vector(&self, key: &str) -> Vec<f64> {
        oov_vector(key, self.dim)
    }
}

pub fn stable_hash(key: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(key.as_bytes());
    h.finish()
}

pub fn oov_vector(key: &str, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(key));
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
