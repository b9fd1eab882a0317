use std::collections::HashMap;
use std::path::Path;

use super::DecodeError;
use crate::seq2seq::Vocab;

/// Unigram counts of a user corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StyleStats {
    counts: HashMap<String, u64>,
    total: u64,
}

impl StyleStats {
    pub fn from_sentences<I, S>(sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut stats = StyleStats::default();
        for s in sentences {
            for w in s.as_ref().split_whitespace() {
                stats.add(w, 1);
            }
        }
        stats
    }

    fn add(&mut self, token: &str, n: u64) {
        *self.counts.entry(token.to_lowercase()).or_insert(0) += n;
        self.total += n;
    }

    /// `token<TAB>count` per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, DecodeError> {
        let mut stats = StyleStats::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: &str| DecodeError::BadStats { line: i + 1, message: message.to_string() };
            let (tok, count) = line.split_once('\t').ok_or_else(|| bad("expected token<TAB>count"))?;
            let n: u64 = count.trim().parse().map_err(|_| bad("count is not a non-negative integer"))?;
            stats.add(tok, n);
        }
        Ok(stats)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DecodeError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(&token.to_lowercase()).copied().unwrap_or(0)
    }

    /// Add-one smoothed log-probability over a vocabulary of `vocab_size`.
    pub fn log_prob(&self, token: &str, vocab_size: usize) -> f64 {
        ((self.count(token) + 1) as f64 / (self.total + vocab_size as u64) as f64).ln()
    }
}

#[derive(Debug, Clone)]
pub struct StyleBias {
    pub source: StyleStats,
    pub target: StyleStats,
    pub weight: f64,
}

impl StyleBias {
    pub fn apply(&self, logprobs: &mut [f64], vocab: &Vocab) {
        style_bias(logprobs, vocab, &self.source, &self.target, self.weight);
    }
}

/// Adds `weight * (log p_target - log p_source)` to each entry.
pub fn style_bias(logprobs: &mut [f64], vocab: &Vocab, source: &StyleStats, target: &StyleStats, weight: f64) {
    if weight == 0.0 {
        return;
    }
    let v = vocab.len();
    for (id, lp) in logprobs.iter_mut().enumerate() {
        if Vocab::is_reserved(id) {
            continue;
        }
        let tok = vocab.token(id);
        *lp += weight * (target.log_prob(tok, v) - source.log_prob(tok, v));
    }
}
