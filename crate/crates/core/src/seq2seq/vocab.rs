use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub const EMPTY: usize = 0;
pub const UNK: usize = 1;
pub const EOS: usize = 2;
pub const BOS: usize = 3;

const RESERVED: [&str; 4] = ["<empty>", "<unk>", "</s>", "<s>"];

/// Output-side token inventory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocab { tokens: RESERVED.iter().map(|s| s.to_string()).collect(), index: HashMap::new() };
        for t in tokens {
            let t = t.into();
            if !RESERVED.contains(&t.as_str()) && !v.tokens.contains(&t) {
                v.tokens.push(t);
            }
        }
        v.reindex();
        v
    }

    /// Collects every token seen at least `min_count` times, most frequent first.
    pub fn build<'a, I>(sentences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in sentences {
            for t in s {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count.max(1)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Vocab::from_tokens(ranked.into_iter().map(|(t, _)| t))
    }

    fn reindex(&mut self) {
        self.index = self.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    /// Restores the lookup table after deserialisation.
    pub fn rebuild_index(&mut self) {
        self.reindex();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= RESERVED.len()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map(String::as_str).unwrap_or(RESERVED[UNK])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_reserved(id: usize) -> bool {
        id < RESERVED.len()
    }

    /// Token ids followed by EOS.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).chain(std::iter::once(EOS)).collect()
    }

    /// Surface tokens, stopping at EOS and skipping other reserved ids.
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .take_while(|&&i| i != EOS)
            .filter(|&&i| i == UNK || !Vocab::is_reserved(i))
            .map(|&i| self.token(i).to_string())
            .collect()
    }
}
