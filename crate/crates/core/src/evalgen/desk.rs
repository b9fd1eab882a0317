//! Wiring between the synthetic grammar, hashed embeddings and the model.

use super::synth::{SynthExample, SynthGrammar};
use crate::eatcore::EatSequence;
use crate::seq2seq::{ModelConfig, Sample, Seq2SeqModel, Vocab};
use crate::vectorizer::{sequence_to_matrix, vector_len, EatVector, EmbeddingStore};

#[derive(Debug, Clone)]
pub struct DeskSetup {
    pub grammar: SynthGrammar,
    pub store: EmbeddingStore,
    pub vocab: Vocab,
}

impl DeskSetup {
    /// Hashed `embed_dim`-dimensional vectors for every lexicon lemma and a
    /// vocabulary covering everything the grammar can say.
    pub fn new(grammar: SynthGrammar, embed_dim: usize, embed_seed: u64) -> Self {
        let store = EmbeddingStore::hashed(embed_dim, embed_seed, grammar.lemmas());
        let vocab = Vocab::from_tokens(grammar.vocabulary());
        DeskSetup { grammar, store, vocab }
    }

    pub fn model(&self, hidden: usize, seed: u64) -> Seq2SeqModel {
        let cfg = ModelConfig::new(vector_len(self.store.dim()), hidden, self.vocab.len());
        Seq2SeqModel::new(cfg, self.vocab.clone(), self.store.dim(), self.store.oov_policy(), seed)
    }

    pub fn input(&self, eat: &EatSequence) -> Vec<EatVector> {
        sequence_to_matrix(eat, &self.store)
    }

    pub fn samples(&self, model: &Seq2SeqModel, examples: &[SynthExample]) -> Vec<Sample> {
        examples.iter().map(|ex| model.sample(&self.input(&ex.gold), &ex.tokens)).collect()
    }
}
