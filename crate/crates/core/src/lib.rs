//! Event-Agent-Theme sentence representations and an attention
//! encoder-decoder that turns them back into text.

pub mod decoding;
pub mod depgraph;
pub mod eatcore;
pub mod evalgen;
pub mod pipeline;
pub mod placeholders;
pub mod seq2seq;
pub mod transform;
pub mod vectorizer;
