//! Parse in, sentence out: masking, extraction, transformation, decoding and
//! unmasking wired together.

use thiserror::Error;

use crate::decoding::{decode, default_surface_forms, DecodeConstraints, DecodeError, Reparser, StyleBias};
use crate::depgraph::{DepGraph, DepGraphError};
use crate::eatcore::{extract, EatError, EatSequence};
use crate::placeholders::{mask, unmask, PlaceholderError, PlaceholderLexicon, PlaceholderMap};
use crate::seq2seq::{Seq2SeqModel, Vocab};
use crate::transform::{apply_transform, TransformError, TransformSpec};
use crate::vectorizer::{hashed_vector, sequence_to_matrix, EmbeddingStore, OovPolicy};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("embeddings have {found} dimensions, the model was trained on {expected}")]
    EmbeddingDim { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] DepGraphError),
    #[error(transparent)]
    Eat(#[from] EatError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Placeholder(#[from] PlaceholderError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Embeddings for the decoder vocabulary as the model's OOV policy would
/// produce them, so that exactly the words the model can say count as known.
pub fn store_from_vocab(embed_dim: usize, policy: OovPolicy, vocab: &Vocab) -> EmbeddingStore {
    let mut store = EmbeddingStore::new(embed_dim, policy);
    for tok in vocab.tokens().iter().enumerate().filter(|(i, _)| !Vocab::is_reserved(*i)).map(|(_, t)| t) {
        let v = match policy {
            OovPolicy::Zero => vec![0.0; embed_dim],
            OovPolicy::HashPseudorandom { seed } => hashed_vector(embed_dim, seed, tok),
        };
        store.insert(tok.clone(), v).expect("dimension matches");
    }
    store
}

/// One decoded sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub source_id: String,
    pub tokens: Vec<String>,
    /// The EAT the decoder was given.
    pub eat: EatSequence,
    pub placeholders: PlaceholderMap,
    /// Name or number placeholders in the output with no mapping.
    pub unmatched: Vec<String>,
}

impl Rendered {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

pub struct Pipeline<'a> {
    pub model: &'a Seq2SeqModel,
    pub store: EmbeddingStore,
    /// Restricted to words the model's vocabulary contains.
    pub lexicon: PlaceholderLexicon,
    pub beam_width: usize,
    pub reparser: Option<&'a (dyn Reparser + Sync)>,
    pub style: Option<StyleBias>,
    pub forms: &'a (dyn Fn(&str) -> Vec<String> + Sync),
    /// Whether names, numbers and unknown words are masked first.
    pub masking: bool,
    pub seed: u64,
}

impl<'a> Pipeline<'a> {
    pub fn new(model: &'a Seq2SeqModel) -> Self {
        let mut p = Pipeline {
            model,
            store: store_from_vocab(model.embed_dim, model.oov_policy, &model.vocab),
            lexicon: PlaceholderLexicon::default(),
            beam_width: 10,
            reparser: None,
            style: None,
            forms: &default_surface_forms,
            masking: true,
            seed: 0,
        };
        p.set_lexicon(PlaceholderLexicon::default());
        p
    }

    pub fn set_store(&mut self, store: EmbeddingStore) -> Result<(), PipelineError> {
        if store.dim() != self.model.embed_dim {
            return Err(PipelineError::EmbeddingDim { expected: self.model.embed_dim, found: store.dim() });
        }
        self.store = store;
        Ok(())
    }

    pub fn set_lexicon(&mut self, mut lexicon: PlaceholderLexicon) {
        let vocab = &self.model.vocab;
        lexicon.retain_known(|w| vocab.get(w).is_some());
        self.lexicon = lexicon;
    }

    fn surface_forms(&self, lemma: &str) -> Vec<String> {
        let mut f = (self.forms)(lemma);
        f.extend(self.lexicon.forms(lemma).into_iter().skip(1));
        f
    }

    /// Masks when enabled. A sentence whose placeholders run out is passed
    /// on unmasked.
    fn masked(&self, graph: &DepGraph) -> Result<(DepGraph, PlaceholderMap), PipelineError> {
        if !self.masking {
            return Ok((graph.clone(), PlaceholderMap::default()));
        }
        match mask(graph, &self.store, &self.lexicon, self.seed) {
            Ok(m) => Ok(m),
            Err(PlaceholderError::PlaceholderExhausted { class }) => {
                log::warn!("{}: no {class} placeholder left, decoding unmasked", graph.sentence_id());
                Ok((graph.clone(), PlaceholderMap::default()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Rewrites a parsed sentence according to `spec`.
    pub fn transform(&self, graph: &DepGraph, spec: &TransformSpec) -> Result<Rendered, PipelineError> {
        let (masked, map) = self.masked(graph)?;
        let eat = apply_transform(&extract(&masked)?, spec)?;
        let forms = masked.forms();
        let allowed = map.allowed_placeholders(&self.lexicon, &forms);
        let c = self.constraints(&eat, Some(&forms)).with_placeholders(self.lexicon.name_and_number_words(), allowed);
        let words = self.run(&eat, &c)?;
        let restored = unmask(&words, &map, &self.lexicon);
        Ok(Rendered {
            source_id: graph.sentence_id().to_string(),
            tokens: restored.tokens,
            eat,
            placeholders: map,
            unmatched: restored.unmatched,
        })
    }

    /// Decodes an EAT directly. Without `original` the repetition rules are
    /// off and no name or number placeholder may appear unless the EAT
    /// mentions it.
    pub fn render(&self, eat: &EatSequence, spec: &TransformSpec, original: Option<&[String]>) -> Result<Rendered, PipelineError> {
        let eat = apply_transform(eat, spec)?;
        let mentioned: Vec<String> = eat
            .tuples
            .iter()
            .flat_map(|t| [t.event.lemma(), t.agent.lemma(), t.theme.lemma()])
            .flatten()
            .map(String::from)
            .collect();
        let mut present = mentioned;
        present.extend(original.unwrap_or_default().iter().cloned());
        let allowed = PlaceholderMap::default().allowed_placeholders(&self.lexicon, &present);
        let c = self.constraints(&eat, original).with_placeholders(self.lexicon.name_and_number_words(), allowed);
        let words = self.run(&eat, &c)?;
        Ok(Rendered {
            source_id: eat.source_id.clone(),
            tokens: words,
            eat,
            placeholders: PlaceholderMap::default(),
            unmatched: Vec::new(),
        })
    }

    fn constraints(&self, eat: &EatSequence, original: Option<&[String]>) -> DecodeConstraints {
        let mut c = DecodeConstraints::new(self.beam_width).with_target(eat, |l| self.surface_forms(l));
        if let Some(o) = original {
            c = c.with_original(o);
        }
        c
    }

    fn run(&self, eat: &EatSequence, c: &DecodeConstraints) -> Result<Vec<String>, PipelineError> {
        let input = sequence_to_matrix(eat, &self.store);
        let reparser = self.reparser.map(|r| r as &dyn Reparser);
        Ok(decode(self.model, &input, c, reparser, self.style.as_ref())?.words)
    }
}
