//! Attention LSTM encoder-decoder from EAT vectors to token sequences.

mod checkpoint;
pub mod gradcheck;
pub mod network;
pub mod params;
pub mod tensor;
pub mod train;
pub mod vocab;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::vectorizer::{EatVector, OovPolicy};

pub use checkpoint::{FORMAT_VERSION, MAGIC};
pub use network::{DecoderState, EncodedSource, Sample, StepOutput};
pub use params::{ModelConfig, Params};
pub use train::{EpochStats, TrainConfig};
pub use vocab::{Vocab, BOS, EMPTY, EOS, UNK};

#[derive(Debug, Error)]
pub enum Seq2SeqError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("encoder input is empty")]
    EmptyInput,
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("input vector has width {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("token id {0} is outside the vocabulary")]
    UnknownTokenId(usize),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("checkpoint format {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptTensor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A trained network with the vocabulary and embedding settings it was
/// trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel {
    pub config: ModelConfig,
    pub params: Params<f32>,
    pub vocab: Vocab,
    /// Width of each lemma embedding block in the input vectors.
    pub embed_dim: usize,
    pub oov_policy: OovPolicy,
}

impl Seq2SeqModel {
    pub fn new(config: ModelConfig, vocab: Vocab, embed_dim: usize, oov_policy: OovPolicy, seed: u64) -> Self {
        let mut config = config;
        config.vocab_size = vocab.len();
        let params = Params::init(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        Seq2SeqModel { config, params, vocab, embed_dim, oov_policy }
    }

    fn check_input(&self, input: &[EatVector]) -> Result<Vec<Vec<f32>>, Seq2SeqError> {
        if input.is_empty() {
            return Err(Seq2SeqError::EmptyInput);
        }
        input
            .iter()
            .map(|v| {
                if v.len() == self.config.input_dim {
                    Ok(v.values.clone())
                } else {
                    Err(Seq2SeqError::DimensionMismatch { expected: self.config.input_dim, found: v.len() })
                }
            })
            .collect()
    }

    pub fn encode(&self, input: &[EatVector]) -> Result<EncodedSource<f32>, Seq2SeqError> {
        let rows = self.check_input(input)?;
        Ok(network::encode_source(&self.params, &self.config, &rows))
    }

    /// One decoder step: log-probabilities over the vocabulary, the next
    /// state and the attention weights.
    pub fn decode_step(&self, source: &EncodedSource<f32>, state: &DecoderState<f32>, prev: usize) -> StepOutput<f32> {
        network::decode_steps(&self.params, source, &[state], &[prev]).remove(0)
    }

    /// Batched form of [`Self::decode_step`] over hypotheses sharing a source.
    pub fn decode_steps(
        &self,
        source: &EncodedSource<f32>,
        states: &[&DecoderState<f32>],
        prev: &[usize],
    ) -> Vec<StepOutput<f32>> {
        network::decode_steps(&self.params, source, states, prev)
    }

    /// Arg-max decoding; the result excludes EOS.
    pub fn greedy(&self, input: &[EatVector]) -> Result<Vec<usize>, Seq2SeqError> {
        let source = self.encode(input)?;
        let mut state = source.initial.clone();
        let mut prev = BOS;
        let mut out = Vec::new();
        for _ in 0..self.config.max_output_len {
            let step = self.decode_step(&source, &state, prev);
            let best = step
                .logprobs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(EOS);
            if best == EOS {
                break;
            }
            out.push(best);
            prev = best;
            state = step.state;
        }
        Ok(out)
    }

    pub fn greedy_tokens(&self, input: &[EatVector]) -> Result<Vec<String>, Seq2SeqError> {
        Ok(self.vocab.decode(&self.greedy(input)?))
    }

    /// Turns vectorized inputs and surface tokens into training pairs.
    pub fn sample(&self, input: &[EatVector], tokens: &[String]) -> Sample {
        Sample { input: input.iter().map(|v| v.values.clone()).collect(), target: self.vocab.encode(tokens) }
    }

    pub fn train(
        &mut self,
        tc: &TrainConfig,
        train_set: &[Sample],
        valid_set: &[Sample],
        on_epoch: impl FnMut(&EpochStats, &Params<f32>) -> bool,
    ) -> Result<Vec<EpochStats>, Seq2SeqError> {
        train::train(&mut self.params, &self.config, tc, train_set, valid_set, on_epoch)
    }

    pub fn loss(&self, samples: &[Sample]) -> f64 {
        train::corpus_loss(&self.params, &self.config, samples, 128)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        checkpoint::to_bytes(self)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, Seq2SeqError> {
        checkpoint::from_bytes(buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Seq2SeqError> {
        checkpoint::write_to(self, std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Seq2SeqError> {
        checkpoint::read_from(std::fs::File::open(path)?)
    }
}
