//! Trains on a synthetic corpus and reports held-out reproduction scores.
//!
//! `cargo run --release --example desk -- [train] [held_out] [hidden] [dim] [epochs] [batch] [lr] [decay_after]`

use std::time::Instant;

use eatseq::evalgen::{score_reproduction, DeskSetup, GrammarConfig, SynthGrammar};
use eatseq::seq2seq::TrainConfig;

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (n_train, n_test, hidden, dim, epochs) = (arg(1, 5000), arg(2, 500), arg(3, 128), arg(4, 32), arg(5, 10));
    let setup = DeskSetup::new(SynthGrammar::new(GrammarConfig::default()).expect("default grammar"), dim, 1);
    let corpus = setup.grammar.corpus(n_train + n_test, 42).expect("corpus");
    let (train, test) = corpus.split_at(n_train);
    let mut model = setup.model(hidden, 7);
    let train_samples = setup.samples(&model, train);
    let test_samples = setup.samples(&model, &test[..test.len().min(200)]);
    let batch_size = arg(6, 128);
    let lr: f64 = std::env::args().nth(7).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let decay = arg(8, 5);
    let tc = TrainConfig { epochs, batch_size, learning_rate: lr, decay_after_epoch: decay, ..TrainConfig::default() };
    let started = Instant::now();
    model.train(&tc, &train_samples, &test_samples, |_, _| true).expect("training");
    println!("trained in {:.1}s", started.elapsed().as_secs_f64());
    let started = Instant::now();
    let outputs: Vec<_> = test.iter().map(|ex| model.greedy_tokens(&setup.input(&ex.gold)).expect("decode")).collect();
    let refs: Vec<_> = test.iter().map(|ex| ex.tokens.clone()).collect();
    let report = score_reproduction(&outputs, &refs).expect("scores");
    println!("greedy {:?} in {:.1}s", report, started.elapsed().as_secs_f64());
}
