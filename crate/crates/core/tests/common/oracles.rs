//! Brute-force reference implementations and shared fixtures.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use eatseq::depgraph::{parse_conllu, DepGraph};
use eatseq::vectorizer::EmbeddingStore;

/// Counts n-grams by linear scans, no hashing.
pub fn naive_bleu(cands: &[Vec<String>], refs: &[Vec<String>]) -> f64 {
    let grams = |s: &[String], n: usize| -> Vec<Vec<String>> {
        if s.len() < n {
            return Vec::new();
        }
        (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
    };
    let mut logs = Vec::new();
    for n in 1..=4 {
        let mut matched = 0usize;
        let mut total = 0usize;
        for (c, r) in cands.iter().zip(refs) {
            let cg = grams(c, n);
            let rg = grams(r, n);
            total += cg.len();
            let mut done: Vec<&Vec<String>> = Vec::new();
            for g in &cg {
                if done.contains(&g) {
                    continue;
                }
                done.push(g);
                let in_c = cg.iter().filter(|x| *x == g).count();
                let in_r = rg.iter().filter(|x| *x == g).count();
                matched += in_c.min(in_r);
            }
        }
        if total > 0 {
            if matched == 0 {
                return 0.0;
            }
            logs.push((matched as f64 / total as f64).ln());
        }
    }
    if logs.is_empty() {
        return 0.0;
    }
    let c: usize = cands.iter().map(|x| x.len()).sum();
    let r: usize = refs.iter().map(|x| x.len()).sum();
    let bp = if c == 0 { 0.0 } else if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    100.0 * bp * (logs.iter().sum::<f64>() / logs.len() as f64).exp()
}

pub fn random_sentence(rng: &mut ChaCha8Rng) -> Vec<String> {
    let words = ["the", "a", "dog", "cat", "sees", "saw", "not", "is", "big", "man"];
    let len = rng.random_range(1..12);
    (0..len).map(|_| words[rng.random_range(0..words.len())].to_string()).collect()
}

/// Output tokens breaking a hard decoding rule: UNK, more copies of a word
/// than `max(1, count in original)`, an immediate repeat the original never
/// makes, or a name or number placeholder outside `allowed_names`.
pub fn count_violations(words: &[String], original: &[String], allowed_names: &[String], names: &[String]) -> usize {
    let lower = |w: &String| w.to_lowercase();
    let mut orig: HashMap<String, usize> = HashMap::new();
    for w in original {
        *orig.entry(lower(w)).or_insert(0) += 1;
    }
    let doubled = |w: &str| original.windows(2).any(|p| lower(&p[0]) == w && lower(&p[1]) == w);
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut bad = 0;
    for (i, w) in words.iter().enumerate() {
        let n = seen.entry(lower(w)).or_insert(0);
        *n += 1;
        if *n > orig.get(&lower(w)).copied().unwrap_or(0).max(1) {
            bad += 1;
        }
        if i > 0 && lower(&words[i - 1]) == lower(w) && !doubled(&lower(w)) {
            bad += 1;
        }
        if w == "<unk>" || (names.contains(w) && !allowed_names.contains(w)) {
            bad += 1;
        }
    }
    bad
}

pub const PLACEHOLDER_FIXTURES: &str = include_str!("../fixtures/placeholders.conllu");
pub const NONCE: &[&str] = &["glorp", "zibble", "frindle", "quazz", "blick", "snarf", "trundify", "flurvy", "mext", "brindled"];

pub fn placeholder_fixtures() -> Vec<DepGraph> {
    parse_conllu(PLACEHOLDER_FIXTURES).unwrap()
}

/// Embeddings for every fixture lemma except the nonce words.
pub fn placeholder_store() -> EmbeddingStore {
    let lemmas: HashSet<String> = placeholder_fixtures()
        .iter()
        .flat_map(|g| g.tokens().iter().map(|t| t.lemma.clone()).collect::<Vec<_>>())
        .filter(|l| !NONCE.contains(&l.as_str()))
        .collect();
    EmbeddingStore::hashed(4, 0, lemmas.iter().chain(&["give".to_string(), "away".into(), "of".into()]))
}
