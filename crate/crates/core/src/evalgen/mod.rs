//! Scoring, evaluation harnesses and data generators.

use thiserror::Error;

pub mod bleu;
pub mod categories;
pub mod desk;
pub mod generate;
pub mod harness;
pub mod synth;

pub use bleu::{bleu, preprocess, preprocess_tokens, sentence_bleu};
pub use categories::{Category, Direction};
pub use desk::DeskSetup;
pub use generate::{default_generation_clause, generate_random_eat, GenLexicon};
pub use harness::{
    back_transform_eval, report_table, reproduction_eval, score_reproduction, EvalDecoder, EvalReport, ReproductionReport,
    SentenceRecord,
};
pub use synth::{realize, GrammarConfig, NounEntry, NounPhrase, Plan, SynthExample, SynthGrammar, VerbEntry};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no inputs match {0}")]
    EmptyInput(String),
    #[error("bad grammar configuration: {0}")]
    BadTemplate(String),
    #[error(transparent)]
    Eat(#[from] crate::eatcore::EatError),
    #[error(transparent)]
    Transform(#[from] crate::transform::TransformError),
    #[error("decoding failed: {0}")]
    Decode(String),
    #[error(transparent)]
    Model(#[from] crate::seq2seq::Seq2SeqError),
}
