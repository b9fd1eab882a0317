//! EAT tuples to fixed-width numeric vectors: 28 feature bits followed by
//! the Event, Agent and Theme embeddings.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eatcore::{EatSequence, EatTuple, FEATURE_COUNT};

#[derive(Debug, Error)]
pub enum VectorizerError {
    #[error("embedding file is empty")]
    EmptyFile,
    #[error("line {line}: expected {expected} components, found {found}")]
    InconsistentDimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("vector for {lemma:?} has length {found}, store dimension is {expected}")]
    WrongLength { lemma: String, expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What to embed for a lemma missing from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OovPolicy {
    #[default]
    Zero,
    /// Deterministic unit-norm vector derived from a hash of the lemma.
    HashPseudorandom { seed: u64 },
}

impl OovPolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(OovPolicy::Zero),
            _ => s
                .strip_prefix("hash:")
                .and_then(|seed| seed.parse().ok())
                .map(|seed| OovPolicy::HashPseudorandom { seed }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            OovPolicy::Zero => "zero".into(),
            OovPolicy::HashPseudorandom { seed } => format!("hash:{seed}"),
        }
    }
}

fn fnv1a(seed: u64, text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(text.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Unit-norm Gaussian vector seeded by `(seed, lemma)`.
pub fn hashed_vector(dim: usize, seed: u64, lemma: &str) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(seed, lemma));
    let mut v: Vec<f32> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f32>>,
    oov_policy: OovPolicy,
}

impl EmbeddingStore {
    pub fn new(dim: usize, oov_policy: OovPolicy) -> Self {
        EmbeddingStore { dim, table: HashMap::new(), oov_policy }
    }

    /// A store whose table holds hashed vectors for `lemmas`, with the same
    /// hash used for anything else.
    pub fn hashed<I, S>(dim: usize, seed: u64, lemmas: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut store = EmbeddingStore::new(dim, OovPolicy::HashPseudorandom { seed });
        for l in lemmas {
            let l = l.as_ref();
            store.table.entry(l.to_string()).or_insert_with(|| hashed_vector(dim, seed, l));
        }
        store
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov_policy
    }

    pub fn set_oov_policy(&mut self, policy: OovPolicy) {
        self.oov_policy = policy;
    }

    /// Adds a vector; an existing entry for the same token is kept.
    pub fn insert(&mut self, lemma: impl Into<String>, vector: Vec<f32>) -> Result<(), VectorizerError> {
        let lemma = lemma.into();
        if vector.len() != self.dim {
            return Err(VectorizerError::WrongLength { lemma, expected: self.dim, found: vector.len() });
        }
        self.table.entry(lemma).or_insert(vector);
        Ok(())
    }

    /// Whether the table (not the OOV policy) knows this lemma.
    pub fn contains(&self, lemma: &str) -> bool {
        self.table.contains_key(lemma) || self.table.contains_key(&lemma.to_lowercase())
    }

    /// Embedding of a slot; `None` is the empty token.
    pub fn lookup(&self, lemma: Option<&str>) -> Vec<f32> {
        let Some(lemma) = lemma else { return vec![0.0; self.dim] };
        if let Some(v) = self.table.get(lemma).or_else(|| self.table.get(&lemma.to_lowercase())) {
            return v.clone();
        }
        match self.oov_policy {
            OovPolicy::Zero => vec![0.0; self.dim],
            OovPolicy::HashPseudorandom { seed } => hashed_vector(self.dim, seed, lemma),
        }
    }

    fn write_into(&self, lemma: Option<&str>, out: &mut [f32]) {
        out.copy_from_slice(&self.lookup(lemma));
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }
}

/// Parses the whitespace-separated `token v1 ... vS` text format.
pub fn parse_embeddings(text: &str) -> Result<EmbeddingStore, VectorizerError> {
    let mut store: Option<EmbeddingStore> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values = parts
            .map(|p| p.parse::<f32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| VectorizerError::Malformed { line: line_no, reason: e.to_string() })?;
        if values.is_empty() {
            return Err(VectorizerError::Malformed { line: line_no, reason: "no vector components".into() });
        }
        let s = store.get_or_insert_with(|| EmbeddingStore::new(values.len(), OovPolicy::Zero));
        if values.len() != s.dim {
            return Err(VectorizerError::InconsistentDimension { line: line_no, expected: s.dim, found: values.len() });
        }
        s.table.entry(token.to_string()).or_insert(values);
    }
    store.ok_or(VectorizerError::EmptyFile)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore, VectorizerError> {
    parse_embeddings(&std::fs::read_to_string(path)?)
}

/// One encoder input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EatVector {
    pub values: Vec<f32>,
}

impl EatVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads the feature block back.
    pub fn features(&self) -> [bool; FEATURE_COUNT] {
        let mut f = [false; FEATURE_COUNT];
        for (dst, &v) in f.iter_mut().zip(&self.values) {
            *dst = v != 0.0;
        }
        f
    }

    /// Embedding block `k` (0 = Event, 1 = Agent, 2 = Theme).
    pub fn block(&self, k: usize, dim: usize) -> &[f32] {
        let start = FEATURE_COUNT + k * dim;
        &self.values[start..start + dim]
    }
}

pub fn vector_len(dim: usize) -> usize {
    FEATURE_COUNT + 3 * dim
}

pub fn tuple_to_vector(t: &EatTuple, store: &EmbeddingStore) -> EatVector {
    let dim = store.dim();
    let mut values = vec![0.0f32; vector_len(dim)];
    for (dst, b) in values.iter_mut().zip(t.features()) {
        *dst = if b { 1.0 } else { 0.0 };
    }
    for (k, slot) in [&t.event, &t.agent, &t.theme].into_iter().enumerate() {
        let start = FEATURE_COUNT + k * dim;
        store.write_into(slot.lemma(), &mut values[start..start + dim]);
    }
    EatVector { values }
}

pub fn sequence_to_matrix(seq: &EatSequence, store: &EmbeddingStore) -> Vec<EatVector> {
    seq.tuples.iter().map(|t| tuple_to_vector(t, store)).collect()
}
