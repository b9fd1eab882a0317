//! Beam search with hard and soft punishments, EAT-based reranking of the
//! final beam and corpus-frequency style biasing.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::eatcore::{EatSequence, Role, Voice};
use crate::seq2seq::{Seq2SeqError, Seq2SeqModel, Vocab, BOS, EOS, UNK};
use crate::vectorizer::EatVector;

mod rerank;
mod style;

pub use rerank::{eat_agreement, rerank_by_eat, rerank_scores, CommandReparser, Reparser};
pub use style::{style_bias, StyleBias, StyleStats};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Model(#[from] Seq2SeqError),
    #[error("style statistics line {line}: {message}")]
    BadStats { line: usize, message: String },
    #[error("reparser command failed: {0}")]
    Reparser(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const HARD_PUNISHMENT: f64 = 10000.0;
pub const PASSIVE_AGENT_PUNISHMENT: f64 = 10.0;
pub const CLAUSE_FEATURE_PENALTY: f64 = 10.0;
pub const OTHER_FEATURE_UNIT: f64 = 1.0;

/// `lemma`, `lemma+s` and `lemma+es`, lowercased.
pub fn default_surface_forms(lemma: &str) -> Vec<String> {
    let l = lemma.to_lowercase();
    vec![l.clone(), format!("{l}s"), format!("{l}es")]
}

#[derive(Debug, Clone)]
pub struct DecodeConstraints {
    pub beam_width: usize,
    /// Falls back to the model's own limit.
    pub max_len: Option<usize>,
    /// Surface tokens of the sentence being rewritten. `None` switches the
    /// repetition rules off, as for generation from a bare EAT.
    pub original_tokens: Option<Vec<String>>,
    /// Name and number placeholder words known to the masker.
    pub placeholder_words: HashSet<String>,
    /// The subset of `placeholder_words` the output may use.
    pub allowed_placeholders: HashSet<String>,
    /// The EAT fed to the decoder.
    pub target: Option<EatSequence>,
    /// Lowercase surface forms of the passive Agent head and its modifiers.
    pub agent_forms: HashSet<String>,
    /// Lowercase surface forms of the Theme head.
    pub theme_forms: HashSet<String>,
    pub hard_punishment: f64,
    pub passive_agent_punishment: f64,
    pub clause_feature_penalty: f64,
    pub other_feature_unit: f64,
}

impl Default for DecodeConstraints {
    fn default() -> Self {
        DecodeConstraints::new(10)
    }
}

impl DecodeConstraints {
    pub fn new(beam_width: usize) -> Self {
        DecodeConstraints {
            beam_width,
            max_len: None,
            original_tokens: None,
            placeholder_words: HashSet::new(),
            allowed_placeholders: HashSet::new(),
            target: None,
            agent_forms: HashSet::new(),
            theme_forms: HashSet::new(),
            hard_punishment: HARD_PUNISHMENT,
            passive_agent_punishment: PASSIVE_AGENT_PUNISHMENT,
            clause_feature_penalty: CLAUSE_FEATURE_PENALTY,
            other_feature_unit: OTHER_FEATURE_UNIT,
        }
    }

    pub fn with_original<S: AsRef<str>>(mut self, tokens: &[S]) -> Self {
        self.original_tokens = Some(tokens.iter().map(|t| t.as_ref().to_string()).collect());
        self
    }

    pub fn with_placeholders<I, J, S, T>(mut self, words: I, allowed: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        self.placeholder_words = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self.allowed_placeholders = allowed.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self
    }

    /// Records the decoder's input EAT. When its main clause is passive the
    /// Agent and Theme surface forms for the ordering rule come from `forms`.
    pub fn with_target(mut self, target: &EatSequence, forms: impl Fn(&str) -> Vec<String>) -> Self {
        self.agent_forms.clear();
        self.theme_forms.clear();
        if let Some(main) = target.first() {
            if main.clause.voice == Voice::Passive && !main.agent.is_empty() {
                let mut lemmas: Vec<&str> = main.agent.lemma().into_iter().collect();
                for t in &target.tuples[1..] {
                    if !t.clause.is_verbal() && t.event.is_empty() && t.theme.is_empty() {
                        lemmas.extend(t.agent.lemma());
                    }
                }
                let lower = |v: Vec<String>| v.into_iter().map(|f| f.to_lowercase()).collect::<Vec<_>>();
                self.theme_forms = main.slot(Role::Theme).lemma().map(|l| lower(forms(l))).unwrap_or_default().into_iter().collect();
                self.agent_forms = lemmas
                    .into_iter()
                    .flat_map(|l| lower(forms(l)))
                    .filter(|f| !self.theme_forms.contains(f))
                    .collect();
            }
        }
        self.target = Some(target.clone());
        self
    }

    fn passive_rule_active(&self) -> bool {
        !self.agent_forms.is_empty() && !self.theme_forms.is_empty()
    }
}

/// Per-decode lookup tables built from the constraints and the vocabulary.
pub struct Punisher<'a> {
    c: &'a DecodeConstraints,
    lower: Vec<String>,
    original: HashMap<String, usize>,
    original_doubles: HashSet<String>,
    banned: Vec<usize>,
    agent_ids: Vec<usize>,
    theme_ids: HashSet<usize>,
}

impl<'a> Punisher<'a> {
    pub fn new(vocab: &Vocab, c: &'a DecodeConstraints) -> Self {
        let lower: Vec<String> = vocab.tokens().iter().map(|t| t.to_lowercase()).collect();
        let mut original = HashMap::new();
        let mut original_doubles = HashSet::new();
        if let Some(orig) = &c.original_tokens {
            let o: Vec<String> = orig.iter().map(|t| t.to_lowercase()).collect();
            for w in &o {
                *original.entry(w.clone()).or_insert(0) += 1;
            }
            for pair in o.windows(2) {
                if pair[0] == pair[1] {
                    original_doubles.insert(pair[0].clone());
                }
            }
        }
        let mut banned = vec![UNK];
        banned.extend(
            (0..lower.len())
                .filter(|&i| c.placeholder_words.contains(&lower[i]) && !c.allowed_placeholders.contains(&lower[i])),
        );
        let ids = |set: &HashSet<String>| (0..lower.len()).filter(|&i| set.contains(&lower[i])).collect::<Vec<_>>();
        let agent_ids = if c.passive_rule_active() { ids(&c.agent_forms) } else { Vec::new() };
        let theme_ids = ids(&c.theme_forms).into_iter().collect();
        Punisher { c, lower, original, original_doubles, banned, agent_ids, theme_ids }
    }

    pub fn contains_theme(&self, tokens: &[usize]) -> bool {
        tokens.iter().any(|t| self.theme_ids.contains(t))
    }

    /// Subtracts the punishments for extending `tokens` by each vocabulary
    /// entry. `theme_on_beam` says whether any hypothesis on the current beam
    /// already holds the Theme.
    pub fn apply(&self, logprobs: &mut [f64], tokens: &[usize], theme_on_beam: bool) {
        let hard = self.c.hard_punishment;
        for &b in &self.banned {
            if let Some(x) = logprobs.get_mut(b) {
                *x -= hard;
            }
        }
        if self.c.original_tokens.is_some() {
            let mut seen: HashMap<usize, usize> = HashMap::new();
            for &t in tokens {
                *seen.entry(t).or_insert(0) += 1;
            }
            for (&t, &n) in &seen {
                if t == EOS || t >= logprobs.len() {
                    continue;
                }
                let w = &self.lower[t];
                let allowed = self.original.get(w).copied().unwrap_or(0).max(1);
                if n >= allowed {
                    logprobs[t] -= hard;
                }
            }
            if let Some(&last) = tokens.last() {
                if last != EOS
                    && last < logprobs.len()
                    && !self.original_doubles.contains(&self.lower[last])
                    && seen[&last] < self.original.get(&self.lower[last]).copied().unwrap_or(0).max(1)
                {
                    logprobs[last] -= hard;
                }
            }
        }
        if theme_on_beam && !self.agent_ids.is_empty() && !self.contains_theme(tokens) {
            for &a in &self.agent_ids {
                logprobs[a] -= self.c.passive_agent_punishment;
            }
        }
    }
}

/// One-off form of [`Punisher::apply`].
pub fn apply_punishments(
    step_logprobs: &[f64],
    tokens: &[usize],
    vocab: &Vocab,
    constraints: &DecodeConstraints,
    theme_on_beam: bool,
) -> Vec<f64> {
    let mut out = step_logprobs.to_vec();
    Punisher::new(vocab, constraints).apply(&mut out, tokens, theme_on_beam);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Generated ids, without BOS; a final EOS is kept.
    pub tokens: Vec<usize>,
    /// Sum of punished step log-probabilities.
    pub score: f64,
    /// Sum of raw model log-probabilities.
    pub base_logprob: f64,
    pub finished: bool,
    pub attention: Vec<Vec<f32>>,
}

impl BeamHypothesis {
    pub fn words(&self, vocab: &Vocab) -> Vec<String> {
        vocab.decode(&self.tokens)
    }
}

pub fn is_final(vocab: &Vocab, id: usize) -> bool {
    id == EOS || matches!(vocab.token(id), "." | "!" | "?")
}

/// Beam search; returns finished hypotheses best first.
pub fn beam_search(
    model: &Seq2SeqModel,
    input: &[EatVector],
    c: &DecodeConstraints,
    style: Option<&StyleBias>,
) -> Result<Vec<BeamHypothesis>, DecodeError> {
    let source = model.encode(input)?;
    let vocab = &model.vocab;
    let k = c.beam_width.max(1);
    let max_len = c.max_len.unwrap_or(model.config.max_output_len).max(1);
    let punisher = Punisher::new(vocab, c);
    let start = BeamHypothesis { tokens: Vec::new(), score: 0.0, base_logprob: 0.0, finished: false, attention: Vec::new() };
    let mut beam = vec![(start, source.initial.clone())];
    while beam.iter().any(|(h, _)| !h.finished) {
        let theme_on_beam = beam.iter().any(|(h, _)| punisher.contains_theme(&h.tokens));
        let live: Vec<usize> = (0..beam.len()).filter(|&i| !beam[i].0.finished).collect();
        let states: Vec<_> = live.iter().map(|&i| &beam[i].1).collect();
        let prev: Vec<usize> = live.iter().map(|&i| beam[i].0.tokens.last().copied().unwrap_or(BOS)).collect();
        let outs = model.decode_steps(&source, &states, &prev);
        let mut next: Vec<(BeamHypothesis, _)> = Vec::new();
        for (&i, out) in live.iter().zip(outs) {
            let hyp = &beam[i].0;
            let raw: Vec<f64> = out.logprobs.iter().map(|&x| f64::from(x)).collect();
            let mut adj = raw.clone();
            if let Some(s) = style {
                s.apply(&mut adj, vocab);
            }
            punisher.apply(&mut adj, &hyp.tokens, theme_on_beam);
            let mut order: Vec<usize> = (0..adj.len()).filter(|&t| t != BOS).collect();
            order.sort_by(|&a, &b| adj[b].total_cmp(&adj[a]).then(a.cmp(&b)));
            for &t in order.iter().take(k) {
                let mut h = hyp.clone();
                h.tokens.push(t);
                h.score += adj[t];
                h.base_logprob += raw[t];
                h.finished = is_final(vocab, t) || h.tokens.len() >= max_len;
                h.attention.push(out.attention.clone());
                next.push((h, out.state.clone()));
            }
        }
        next.extend(beam.into_iter().filter(|(h, _)| h.finished));
        next.sort_by(|a, b| b.0.score.total_cmp(&a.0.score).then_with(|| a.0.tokens.cmp(&b.0.tokens)));
        next.truncate(k);
        beam = next;
    }
    Ok(beam.into_iter().map(|(h, _)| h).collect())
}

/// Output of [`decode`].
#[derive(Debug, Clone)]
pub struct Decoded {
    pub words: Vec<String>,
    pub chosen: usize,
    pub hypotheses: Vec<BeamHypothesis>,
}

/// Beam search followed by EAT reranking when a reparser and a target EAT
/// are available.
pub fn decode(
    model: &Seq2SeqModel,
    input: &[EatVector],
    c: &DecodeConstraints,
    reparser: Option<&dyn Reparser>,
    style: Option<&StyleBias>,
) -> Result<Decoded, DecodeError> {
    let hypotheses = beam_search(model, input, c, style)?;
    let chosen = match (reparser, &c.target) {
        (Some(r), Some(t)) => rerank_by_eat(&hypotheses, &model.vocab, t, r, c).unwrap_or(0),
        _ => 0,
    };
    Ok(Decoded { words: hypotheses[chosen].words(&model.vocab), chosen, hypotheses })
}
