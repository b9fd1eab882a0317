//! Sentence normalisation and BLEU-4.

use std::collections::HashMap;

use super::EvalError;

const CLITICS: &[(&str, &str)] = &[
    ("can't", "can not"),
    ("won't", "will not"),
    ("n't", " not"),
    ("'m", " am"),
    ("'re", " are"),
    ("'ve", " have"),
    ("'d", " would"),
    ("'s", " 's"),
];

/// Lowercases, splits contractions, drops punctuation and maps non-initial
/// "is" to "'s".
pub fn preprocess(sentence: &str) -> Vec<String> {
    let mut text = sentence.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    for (from, to) in CLITICS {
        text = text.replace(from, to);
    }
    let cleaned: String = text.chars().map(|c| if c.is_ascii_punctuation() && c != '\'' { ' ' } else { c }).collect();
    let mut out: Vec<String> = Vec::new();
    for raw in cleaned.split_whitespace() {
        let tok = if raw == "'s" { raw } else { raw.trim_matches('\'') };
        if tok.is_empty() {
            continue;
        }
        if tok == "is" && !out.is_empty() {
            out.push("'s".to_string());
        } else {
            out.push(tok.to_string());
        }
    }
    out
}

/// [`preprocess`] over already tokenised text.
pub fn preprocess_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let joined: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    preprocess(&joined.join(" "))
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and candidate n-gram total for one pair.
fn clipped(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    let matched = cand.iter().map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0))).sum();
    (matched, candidate.len().saturating_sub(n - 1))
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Corpus BLEU-4 on a 0-100 scale. Orders for which the candidates contain
/// no n-grams at all are left out of the geometric mean.
pub fn bleu(candidates: &[Vec<String>], references: &[Vec<String>]) -> Result<f64, EvalError> {
    if candidates.len() != references.len() {
        return Err(EvalError::LengthMismatch { candidates: candidates.len(), references: references.len() });
    }
    if candidates.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 1..=4 {
        let (mut m, mut t) = (0usize, 0usize);
        for (c, r) in candidates.iter().zip(references) {
            let (a, b) = clipped(c, r, n);
            m += a;
            t += b;
        }
        if t == 0 {
            continue;
        }
        if m == 0 {
            return Ok(0.0);
        }
        log_sum += (m as f64 / t as f64).ln();
        orders += 1;
    }
    if orders == 0 {
        return Ok(0.0);
    }
    let c: usize = candidates.iter().map(Vec::len).sum();
    let r: usize = references.iter().map(Vec::len).sum();
    Ok(100.0 * brevity_penalty(c, r) * (log_sum / orders as f64).exp())
}

/// Single-pair BLEU-4 with add-one smoothing above unigrams, for diagnostics.
pub fn sentence_bleu(candidate: &[String], reference: &[String]) -> f64 {
    let (m1, t1) = clipped(candidate, reference, 1);
    if t1 == 0 || m1 == 0 {
        return 0.0;
    }
    let mut log_sum = (m1 as f64 / t1 as f64).ln();
    for n in 2..=4 {
        let (m, t) = clipped(candidate, reference, n);
        log_sum += ((m + 1) as f64 / (t + 1) as f64).ln();
    }
    100.0 * brevity_penalty(candidate.len(), reference.len()) * (log_sum / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn preprocessing_examples() {
        assert_eq!(preprocess("I don't know."), toks("i do not know"));
        assert_eq!(preprocess("Is it true?"), toks("is it true"));
        assert_eq!(preprocess("It is what I'm told, they've said, we'd go"), toks("it 's what i am told they have said we would go"));
        assert_eq!(preprocess("John 's dog"), toks("john 's dog"));
        assert_eq!(preprocess("You can't, he won't"), toks("you can not he will not"));
        assert!(preprocess("").is_empty());
        assert!(preprocess(" ... ! ").is_empty());
    }

    #[test]
    fn perfect_and_disjoint() {
        let a = vec![toks("the dog sees the cat"), toks("a man runs")];
        assert!((bleu(&a, &a).unwrap() - 100.0).abs() < 1e-12);
        let b = vec![toks("x y z w v"), toks("q r s")];
        assert_eq!(bleu(&b, &a).unwrap(), 0.0);
        assert!(matches!(bleu(&a, &b[..1]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(bleu(&[], &[]), Err(EvalError::EmptyCorpus)));
        assert!((sentence_bleu(&a[0], &a[0]) - 100.0).abs() < 1e-12);
    }
}
