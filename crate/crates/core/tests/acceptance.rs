//! Acceptance run: one PASS or FAIL line per criterion.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eatseq::decoding::{decode, DecodeConstraints, Reparser};
use eatseq::depgraph::DepGraph;
use eatseq::eatcore::{category_of, extract, EatSequence, EatTuple, Voice};
use eatseq::evalgen::{
    back_transform_eval, bleu, default_generation_clause, generate_random_eat, report_table, score_reproduction,
    Direction, DeskSetup, EvalDecoder, GenLexicon, GrammarConfig, SynthExample, SynthGrammar,
};
use eatseq::placeholders::{mask, unmask, PlaceholderLexicon};
use eatseq::seq2seq::gradcheck::gradient_check;
use eatseq::seq2seq::{ModelConfig, Params, Sample, Seq2SeqModel, TrainConfig, EOS};
use eatseq::transform::apply_transform;
use eatseq::vectorizer::{tuple_to_vector, vector_len, EmbeddingStore, OovPolicy};

use common::memo::memorize;
use common::oracles::{count_violations, naive_bleu, placeholder_fixtures, placeholder_store, random_sentence};
use common::strategies::arb_tuple;
use common::*;

type Outcome = Result<String, String>;

#[derive(Default)]
struct Run {
    failed: usize,
}

impl Run {
    fn check(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gold_suite() -> Outcome {
    let pairs = gold_pairs();
    let wrong: Vec<String> = pairs
        .iter()
        .filter(|(g, gold)| extract(g).ok().as_ref() != Some(gold))
        .map(|(g, _)| g.sentence_id().to_string())
        .collect();
    verdict(pairs.len() >= 15 && wrong.is_empty(), format!("{}/{} fixtures exact, wrong: {wrong:?}", pairs.len() - wrong.len(), pairs.len()))
}

fn vector_law() -> Outcome {
    let store = EmbeddingStore::new(300, OovPolicy::Zero);
    let len = tuple_to_vector(&gold_pairs()[0].1.tuples[0], &store).len();
    let small = EmbeddingStore::hashed(8, 2, Vec::<String>::new());
    let mut runner = TestRunner::deterministic();
    let strategy = arb_tuple();
    let mut bad = 0;
    for _ in 0..1000 {
        let t: EatTuple = strategy.new_tree(&mut runner).expect("tuple").current();
        let v = tuple_to_vector(&t, &small);
        let lemma = |s: &eatseq::eatcore::WordSlot| s.lemma().map(String::from);
        let back = EatTuple::from_features(&v.features(), lemma(&t.event), lemma(&t.agent), lemma(&t.theme));
        if v.len() != vector_len(8) || back.ok().as_ref() != Some(&t) {
            bad += 1;
        }
    }
    verdict(len == 928 && bad == 0, format!("S=300 gives {len} components; {bad}/1000 feature round-trips failed"))
}

fn gradients() -> Outcome {
    let input_dim = vector_len(8);
    let cfg = ModelConfig { decoder_embed_dim: 6, attention_dim: 7, dropout: 0.0, ..ModelConfig::new(input_dim, 16, 12) };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = Params::<f32>::init(&cfg, &mut rng).cast::<f64>();
    let mut sample = |steps: usize, len: usize| {
        let input = (0..steps).map(|_| (0..input_dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()).collect();
        let mut target: Vec<usize> = (0..len).map(|_| rng.random_range(4..12)).collect();
        target.push(EOS);
        Sample { input, target }
    };
    let samples = vec![sample(3, 4), sample(1, 2)];
    let started = Instant::now();
    let report = gradient_check(&params, &cfg, &samples, 40, 1e-5, 11);
    let secs = started.elapsed().as_secs_f64();
    verdict(
        report.max_rel_error < 1e-4 && secs < 60.0,
        format!("max relative error {:.2e} over {} entries", report.max_rel_error, report.checked),
    )
}

fn memorization() -> Outcome {
    let started = Instant::now();
    let m = memorize(5);
    let secs = started.elapsed().as_secs_f64();
    let hit = m.reproduced();
    verdict(hit == 10 && m.epochs <= 200 && secs < 120.0, format!("{hit}/10 reproduced after {} epochs in {secs:.0}s", m.epochs))
}

struct Desk {
    setup: DeskSetup,
    model: Seq2SeqModel,
    test: Vec<SynthExample>,
}

fn train_desk(slot: &mut Option<Desk>) -> Outcome {
    let setup = DeskSetup::new(SynthGrammar::new(GrammarConfig::default()).expect("grammar"), 32, 1);
    let corpus = setup.grammar.corpus(5500, 42).expect("corpus");
    let (train, test) = corpus.split_at(5000);
    let mut model = setup.model(128, 7);
    let samples = setup.samples(&model, train);
    let tc = TrainConfig { epochs: 80, batch_size: 32, learning_rate: 2e-3, decay_after_epoch: 60, ..TrainConfig::default() };
    let started = Instant::now();
    model.train(&tc, &samples, &[], |_, _| true).map_err(|e| e.to_string())?;
    let minutes = started.elapsed().as_secs_f64() / 60.0;
    let outputs: Vec<Vec<String>> = test.iter().map(|ex| model.greedy_tokens(&setup.input(&ex.gold)).expect("decode")).collect();
    let refs: Vec<Vec<String>> = test.iter().map(|ex| ex.tokens.clone()).collect();
    let r = score_reproduction(&outputs, &refs).map_err(|e| e.to_string())?;
    *slot = Some(Desk { setup, model, test: test.to_vec() });
    verdict(
        r.token_accuracy >= 0.98 && r.exact_rate() >= 0.90 && r.corpus_bleu >= 95.0 && minutes <= 30.0,
        format!(
            "held-out {}: token accuracy {:.4}, exact {:.3}, BLEU {:.2}, trained in {minutes:.1} min",
            r.n,
            r.token_accuracy,
            r.exact_rate(),
            r.corpus_bleu
        ),
    )
}

fn decoder<'a>(d: &'a Desk, forms: &'a (dyn Fn(&str) -> Vec<String> + Sync)) -> EvalDecoder<'a> {
    let mut dec = EvalDecoder::new(&d.model, &d.setup.store, &d.setup.grammar);
    dec.forms = forms;
    dec
}

fn directions(d: &Desk) -> Outcome {
    let forms = |l: &str| d.setup.grammar.surface_forms(l);
    let dec = decoder(d, &forms);
    let inputs: Vec<(DepGraph, EatSequence)> = d.test.iter().map(|ex| (ex.graph.clone(), ex.gold.clone())).collect();
    let mut reports = Vec::new();
    for dir in Direction::all() {
        reports.push(back_transform_eval(&dec, &inputs, dir).map_err(|e| format!("{dir}: {e}"))?);
    }
    for row in report_table(&reports).lines() {
        println!("    {row}");
    }
    let short: Vec<String> = reports
        .iter()
        .filter(|r| r.category_rate() < 0.99 || r.identical_rate() < 0.85 || r.corpus_bleu < 90.0)
        .map(|r| format!("{} ({:.3}/{:.3}/{:.1})", r.direction, r.category_rate(), r.identical_rate(), r.corpus_bleu))
        .collect();
    let worst = |f: &dyn Fn(&eatseq::evalgen::EvalReport) -> f64| reports.iter().map(f).fold(f64::INFINITY, f64::min);
    verdict(
        short.is_empty(),
        format!(
            "14 directions, lowest category {:.3}, identical {:.3}, BLEU {:.2}; below threshold: {short:?}",
            worst(&|r| r.category_rate()),
            worst(&|r| r.identical_rate()),
            worst(&|r| r.corpus_bleu)
        ),
    )
}

fn constraints(d: &Desk) -> Outcome {
    let names = d.setup.grammar.config().names.clone();
    let forms = |l: &str| d.setup.grammar.surface_forms(l);
    let all = Direction::all();
    let mut violations = 0;
    for (i, ex) in d.test.iter().take(200).enumerate() {
        let clause = category_of(&ex.gold).map_err(|e| e.to_string())?;
        let dir = (0..all.len()).map(|k| all[(i + k) % all.len()]).find(|dir| dir.from.holds(&clause)).expect("some class holds");
        let target = apply_transform(&ex.gold, &dir.to.as_spec()).map_err(|e| e.to_string())?;
        let allowed: Vec<String> = names.iter().filter(|n| ex.tokens.contains(n)).cloned().collect();
        let c = DecodeConstraints::new(10)
            .with_original(&ex.tokens)
            .with_placeholders(&names, &allowed)
            .with_target(&target, forms);
        let out = decode(&d.model, &d.setup.input(&target), &c, Some(&d.setup.grammar as &dyn Reparser), None).map_err(|e| e.to_string())?;
        violations += count_violations(&out.words, &ex.tokens, &allowed, &names);
    }
    let mut broken = 0;
    let mut checked = 0;
    for dir in all {
        for ex in &d.test {
            let c = category_of(&ex.gold).map_err(|e| e.to_string())?;
            if !dir.from.holds(&c) {
                continue;
            }
            checked += 1;
            let to = dir.to.as_spec();
            let there = apply_transform(&ex.gold, &to).map_err(|e| e.to_string())?;
            let back = apply_transform(&there, &dir.from.as_spec()).map_err(|e| e.to_string())?;
            let inverse = apply_transform(&there, &to.inverse_for(&c)).map_err(|e| e.to_string())?;
            if back != ex.gold || inverse != ex.gold || !dir.to.holds(&category_of(&there).map_err(|e| e.to_string())?) {
                broken += 1;
            }
        }
    }
    verdict(
        violations == 0 && broken == 0 && checked > 0,
        format!("200 decodes, {violations} violations; involution broken in {broken} of {checked} direction cases"),
    )
}

fn bleu_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let c = vec![random_sentence(&mut rng)];
        let r = vec![random_sentence(&mut rng)];
        let fast = bleu(&c, &r).map_err(|e| e.to_string())?;
        worst = worst.max((fast - naive_bleu(&c, &r)).abs());
    }
    verdict(worst <= 1e-9, format!("50 pairs, largest difference {worst:.1e}"))
}

fn placeholder_roundtrip() -> Outcome {
    let lex = PlaceholderLexicon::default();
    let store = placeholder_store();
    let graphs = placeholder_fixtures();
    let mut restored = 0;
    for g in &graphs {
        let (masked, map) = mask(g, &store, &lex, 0).map_err(|e| format!("{}: {e}", g.sentence_id()))?;
        let back = unmask(&masked.forms(), &map, &lex);
        if !map.is_empty() && back.tokens == g.forms() && back.unmatched.is_empty() {
            restored += 1;
        }
    }
    verdict(graphs.len() == 100 && restored == 100, format!("{restored}/{} fixtures restored", graphs.len()))
}

fn generator() -> Outcome {
    let lex = GenLexicon::default();
    let n = 10_000usize;
    let mut counts = vec![0usize; lex.verbs.len()];
    let mut off = 0;
    for seed in 0..n as u64 {
        let eat = generate_random_eat(&lex, default_generation_clause(), seed);
        let t = &eat.tuples[0];
        let c = t.clause;
        let flags = eat.tuples.len() == 1 && c.truth && c.past && !c.present && !c.perfect && c.voice == Voice::Active;
        let in_lex = |s: Option<&str>, list: &[String]| s.is_some_and(|s| list.iter().any(|x| x == s));
        if !flags || !in_lex(t.agent.lemma(), &lex.nouns) || !in_lex(t.theme.lemma(), &lex.nouns) {
            off += 1;
        }
        match lex.verbs.iter().position(|v| Some(v.as_str()) == t.event.lemma()) {
            Some(k) => counts[k] += 1,
            None => off += 1,
        }
    }
    let p = 1.0 / counts.len() as f64;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    let max_dev = counts.iter().map(|&c| (c as f64 - n as f64 * p).abs() / sigma).fold(0.0, f64::max);
    verdict(off == 0 && max_dev <= 3.0, format!("{off} draws off-pattern; largest verb deviation {max_dev:.2} sigma"))
}

fn main() {
    let mut run = Run::default();
    run.check("gold EAT suite", gold_suite);
    run.check("vector format law", vector_law);
    run.check("gradient check", gradients);
    run.check("BLEU oracle", bleu_oracle);
    run.check("placeholder round-trip", placeholder_roundtrip);
    run.check("generator", generator);
    run.check("memorization", memorization);
    let mut desk = None;
    run.check("desk-scale training", || train_desk(&mut desk));
    match &desk {
        Some(d) => {
            run.check("transformation round-trip", || directions(d));
            run.check("constraint suite", || constraints(d));
        }
        None => {
            run.check("transformation round-trip", || Err("no desk model".into()));
            run.check("constraint suite", || Err("no desk model".into()));
        }
    }
    if run.failed > 0 {
        println!("{} criteria failed", run.failed);
        std::process::exit(1);
    }
}
