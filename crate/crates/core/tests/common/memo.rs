use eatseq::evalgen::{DeskSetup, GrammarConfig, SynthExample, SynthGrammar};
use eatseq::seq2seq::{Seq2SeqModel, TrainConfig};

pub struct Memorized {
    pub setup: DeskSetup,
    pub model: Seq2SeqModel,
    pub examples: Vec<SynthExample>,
    pub epochs: usize,
}

impl Memorized {
    pub fn reproduced(&self) -> usize {
        reproduced(&self.setup, &self.model, &self.examples)
    }
}

pub fn reproduced(setup: &DeskSetup, model: &Seq2SeqModel, examples: &[SynthExample]) -> usize {
    examples
        .iter()
        .filter(|ex| model.greedy_tokens(&setup.input(&ex.gold)).map(|t| t == ex.tokens).unwrap_or(false))
        .count()
}

/// Ten synthetic sentences fitted until greedy decoding reproduces all of
/// them with a mean token loss under 0.02, for at most 200 epochs.
pub fn memorize(seed: u64) -> Memorized {
    let setup = DeskSetup::new(SynthGrammar::new(GrammarConfig::default()).unwrap(), 8, 1);
    let examples = setup.grammar.corpus(10, seed).unwrap();
    let mut model = setup.model(32, seed);
    model.config.dropout = 0.0;
    let samples = setup.samples(&model, &examples);
    let tc = TrainConfig { epochs: 200, batch_size: 1, learning_rate: 0.01, decay_after_epoch: 200, seed, ..Default::default() };
    let mut probe = model.clone();
    let history = model
        .train(&tc, &samples, &[], |stats, params| {
            if stats.epoch % 10 != 0 || stats.train_loss > 0.02 {
                return true;
            }
            probe.params = params.clone();
            reproduced(&setup, &probe, &examples) < examples.len()
        })
        .unwrap();
    Memorized { epochs: history.len(), setup, model, examples }
}
