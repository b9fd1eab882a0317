use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use eatseq::decoding::{default_surface_forms, CommandReparser, Reparser, StyleBias, StyleStats};
use eatseq::depgraph::{parse_conllu, write_conllu, DepGraph};
use eatseq::eatcore::{extract, render_lf, EatSequence};
use eatseq::evalgen::{
    back_transform_eval, default_generation_clause, generate_random_eat, report_table, reproduction_eval, DeskSetup,
    Direction, EvalDecoder, EvalReport, GenLexicon, GrammarConfig, SynthGrammar,
};
use eatseq::pipeline::{store_from_vocab, Pipeline, Rendered};
use eatseq::placeholders::PlaceholderLexicon;
use eatseq::seq2seq::{ModelConfig, Sample, Seq2SeqModel, TrainConfig, Vocab};
use eatseq::transform::TransformSpec;
use eatseq::vectorizer::{load_embeddings, sequence_to_matrix, vector_len, EmbeddingStore};

use crate::{Cli, CliError, Command, InputFormat};

/// One line of `extract` output. `tokens` carries the sentence so that a
/// later decode can apply the same repetition rules as on the parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EatRecord {
    #[serde(flatten)]
    pub eat: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_lines(path: Option<&Path>, lines: &[String]) -> Result<(), CliError> {
    let target = path.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>"));
    let io_err = |source| CliError::Io { path: target.clone(), source };
    let mut out = output(path)?;
    for l in lines {
        writeln!(out, "{l}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn read_graphs(path: &Path) -> Result<Vec<DepGraph>, CliError> {
    parse_conllu(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Seq2SeqModel, CliError> {
    Seq2SeqModel::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn transform_spec(pairs: &[String]) -> Result<TransformSpec, CliError> {
    let mut spec = TransformSpec::identity();
    for p in pairs {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("--set {p:?}: expected key=value")))?;
        spec.set(k, v).map_err(|e| CliError::Usage(format!("--set {p:?}: {e}")))?;
    }
    Ok(spec)
}

fn grammar(path: Option<&Path>) -> Result<SynthGrammar, CliError> {
    let config = match path {
        Some(p) => serde_json::from_str::<GrammarConfig>(&read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => GrammarConfig::default(),
    };
    SynthGrammar::new(config).map_err(CliError::data)
}

enum ReparserChoice {
    Synthetic(Box<SynthGrammar>),
    Command(CommandReparser),
}

impl ReparserChoice {
    fn new(spec: &str, grammar_path: Option<&Path>) -> Result<Self, CliError> {
        if spec == "synthetic" {
            return Ok(ReparserChoice::Synthetic(Box::new(grammar(grammar_path)?)));
        }
        CommandReparser::from_command_line(spec)
            .map(ReparserChoice::Command)
            .ok_or_else(|| CliError::Usage("--reparser needs a command".into()))
    }

    fn reparser(&self) -> &(dyn Reparser + Sync) {
        match self {
            ReparserChoice::Synthetic(g) => g.as_ref(),
            ReparserChoice::Command(c) => c,
        }
    }

    fn forms(&self, lemma: &str) -> Vec<String> {
        match self {
            ReparserChoice::Synthetic(g) => g.surface_forms(lemma),
            ReparserChoice::Command(_) => default_surface_forms(lemma),
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(CliError::data)
}

fn store_for(model: &Seq2SeqModel, embeddings: Option<&Path>) -> Result<EmbeddingStore, CliError> {
    match embeddings {
        Some(p) => load_embeddings(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => Ok(store_from_vocab(model.embed_dim, model.oov_policy, &model.vocab)),
    }
}

pub(crate) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Extract { input, output, lf } => extract_cmd(input, output.as_deref(), *lf),
        Command::Train { .. } => train_cmd(cli),
        Command::Decode { .. } => decode_cmd(cli),
        Command::Generate { .. } => generate_cmd(cli),
        Command::Eval { .. } => eval_cmd(cli),
    }
}

fn extract_cmd(input: &Path, out: Option<&Path>, lf: bool) -> Result<(), CliError> {
    let mut lines = Vec::new();
    let mut failed = 0;
    for g in read_graphs(input)? {
        match extract(&g) {
            Ok(eat) => {
                let rec = EatRecord {
                    eat: serde_json::from_str(&eat.to_json()).map_err(CliError::data)?,
                    tokens: Some(g.forms()),
                };
                lines.push(serde_json::to_string(&rec).map_err(CliError::data)?);
                if lf {
                    lines.push(render_lf(&eat));
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", g.sentence_id());
                failed += 1;
            }
        }
    }
    write_lines(out, &lines)?;
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} sentence(s) had no EAT")));
    }
    Ok(())
}

fn train_cmd(cli: &Cli) -> Result<(), CliError> {
    let Command::Train {
        output,
        synthetic,
        corpus,
        valid,
        held_out,
        held_out_output,
        grammar: grammar_path,
        embeddings,
        embed_dim,
        hidden,
        dropout,
        epochs,
        batch,
        lr,
        decayed_lr,
        decay_after,
        min_count,
    } = &cli.command
    else {
        unreachable!()
    };
    let tc = TrainConfig {
        epochs: *epochs,
        batch_size: *batch,
        learning_rate: *lr,
        decayed_learning_rate: *decayed_lr,
        decay_after_epoch: *decay_after,
        seed: cli.seed,
        ..TrainConfig::default()
    };
    let (mut model, train_set, valid_set) = if let Some(n) = synthetic {
        let setup = DeskSetup::new(grammar(grammar_path.as_deref())?, *embed_dim, cli.seed);
        let all = setup.grammar.corpus(n + held_out, cli.seed).map_err(CliError::data)?;
        let (train, test) = all.split_at(*n);
        if let Some(p) = held_out_output {
            let graphs: Vec<DepGraph> = test.iter().map(|ex| ex.graph.clone()).collect();
            fs::write(p, write_conllu(&graphs)).map_err(|source| CliError::Io { path: p.clone(), source })?;
        }
        let model = setup.model(*hidden, cli.seed);
        let (tr, va) = (setup.samples(&model, train), setup.samples(&model, test));
        (model, tr, va)
    } else {
        let corpus = corpus.as_deref().expect("clap requires a corpus");
        let train = parsed_pairs(corpus)?;
        let valid = match valid {
            Some(p) => parsed_pairs(p)?,
            None => Vec::new(),
        };
        let vocab = Vocab::build(train.iter().map(|(t, _)| t.as_slice()), *min_count);
        let store = match embeddings {
            Some(p) => load_embeddings(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
            None => {
                let lemmas = train.iter().flat_map(|(_, e)| e.tuples.iter()).flat_map(|t| {
                    [t.event.lemma(), t.agent.lemma(), t.theme.lemma()].into_iter().flatten().map(String::from)
                });
                EmbeddingStore::hashed(*embed_dim, cli.seed, lemmas.collect::<Vec<_>>())
            }
        };
        let cfg = ModelConfig::new(vector_len(store.dim()), *hidden, vocab.len());
        let model = Seq2SeqModel::new(cfg, vocab, store.dim(), store.oov_policy(), cli.seed);
        let samples = |pairs: &[(Vec<String>, EatSequence)]| -> Vec<Sample> {
            pairs.iter().map(|(t, e)| model.sample(&sequence_to_matrix(e, &store), t)).collect()
        };
        let (tr, va) = (samples(&train), samples(&valid));
        (model, tr, va)
    };
    model.config.dropout = *dropout;
    model
        .train(&tc, &train_set, &valid_set, |s, _| {
            let valid = s.valid_loss.map_or("-".to_string(), |v| format!("{v:.4}"));
            eprintln!("epoch {:>3}  lr {:.0e}  train {:.4}  valid {valid}  {:.1}s", s.epoch, s.learning_rate, s.train_loss, s.seconds);
            true
        })
        .map_err(CliError::data)?;
    model.save(output).map_err(|e| CliError::Data(format!("{}: {e}", output.display())))
}

/// Sentences and their EATs; sentences without one are skipped.
fn parsed_pairs(path: &Path) -> Result<Vec<(Vec<String>, EatSequence)>, CliError> {
    let graphs = read_graphs(path)?;
    let mut out = Vec::with_capacity(graphs.len());
    for g in graphs {
        match extract(&g) {
            Ok(e) => out.push((g.forms(), e)),
            Err(err) => log::warn!("{}: skipped, {err}", g.sentence_id()),
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no usable sentence", path.display())));
    }
    Ok(out)
}

fn guess_format(path: &Path, text: &str) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl" | "json") => InputFormat::Eat,
        Some("conllu" | "conll") => InputFormat::Conllu,
        _ => {
            let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
            if first.is_some_and(|l| l.starts_with('{')) {
                InputFormat::Eat
            } else {
                InputFormat::Conllu
            }
        }
    }
}

enum Item {
    Graph(DepGraph),
    Eat(EatSequence, Option<Vec<String>>),
}

fn read_items(path: &Path, format: Option<InputFormat>) -> Result<Vec<Item>, CliError> {
    let text = read(path)?;
    match format.unwrap_or_else(|| guess_format(path, &text)) {
        InputFormat::Conllu => Ok(parse_conllu(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
            .into_iter()
            .map(Item::Graph)
            .collect()),
        InputFormat::Eat => text
            .lines()
            .enumerate()
            .filter(|(_, l)| l.trim_start().starts_with('{'))
            .map(|(i, l)| {
                let bad = |e: &dyn std::fmt::Display| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1));
                let rec: EatRecord = serde_json::from_str(l).map_err(|e| bad(&e))?;
                let eat = EatSequence::from_json(l).map_err(|e| bad(&e))?;
                Ok(Item::Eat(eat, rec.tokens))
            })
            .collect(),
    }
}

fn report_failures(results: &[Result<Rendered, String>]) -> Result<(), CliError> {
    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} of {} sentence(s) failed", results.len())));
    }
    Ok(())
}

fn decode_cmd(cli: &Cli) -> Result<(), CliError> {
    let Command::Decode {
        model,
        input,
        output: out,
        format,
        set,
        beam,
        embeddings,
        lexicon,
        no_mask,
        style_source,
        style_target,
        style_weight,
        reparser,
        grammar: grammar_path,
    } = &cli.command
    else {
        unreachable!()
    };
    let spec = transform_spec(set)?;
    let model = load_model(model)?;
    let items = read_items(input, *format)?;
    let choice = reparser.as_deref().map(|r| ReparserChoice::new(r, grammar_path.as_deref())).transpose()?;
    let forms = |l: &str| choice.as_ref().map_or_else(|| default_surface_forms(l), |c| c.forms(l));
    let mut p = Pipeline::new(&model);
    p.set_store(store_for(&model, embeddings.as_deref())?).map_err(CliError::data)?;
    if let Some(path) = lexicon {
        p.set_lexicon(PlaceholderLexicon::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }
    p.beam_width = *beam;
    p.masking = !no_mask;
    p.seed = cli.seed;
    p.forms = &forms;
    p.reparser = choice.as_ref().map(ReparserChoice::reparser);
    if let (Some(s), Some(t)) = (style_source, style_target) {
        let load = |path: &PathBuf| StyleStats::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
        p.style = Some(StyleBias { source: load(s)?, target: load(t)?, weight: *style_weight });
    }
    let results: Vec<Result<Rendered, String>> = pool(cli.jobs)?.install(|| {
        items
            .par_iter()
            .map(|item| match item {
                Item::Graph(g) => p.transform(g, &spec).map_err(|e| format!("{}: {e}", g.sentence_id())),
                Item::Eat(e, toks) => p.render(e, &spec, toks.as_deref()).map_err(|err| format!("{}: {err}", e.source_id)),
            })
            .collect()
    });
    for r in &results {
        if let Err(e) = r {
            eprintln!("{e}");
        }
    }
    let lines: Vec<String> = results.iter().map(|r| r.as_ref().map(Rendered::text).unwrap_or_default()).collect();
    write_lines(out.as_deref(), &lines)?;
    report_failures(&results)
}

fn generate_cmd(cli: &Cli) -> Result<(), CliError> {
    let Command::Generate { model, lexicon, count, set, beam, embeddings, show_eat, output: out } = &cli.command else {
        unreachable!()
    };
    let spec = transform_spec(set)?;
    let lex = match lexicon {
        Some(p) => serde_json::from_str::<GenLexicon>(&read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => GenLexicon::default(),
    };
    if lex.verbs.is_empty() || lex.nouns.is_empty() {
        return Err(CliError::Data("generation lexicon needs verbs and nouns".into()));
    }
    let model = load_model(model)?;
    let mut p = Pipeline::new(&model);
    p.set_store(store_for(&model, embeddings.as_deref())?).map_err(CliError::data)?;
    p.beam_width = *beam;
    let clause = default_generation_clause();
    let eats: Vec<EatSequence> =
        (0..*count as u64).map(|i| generate_random_eat(&lex, clause, cli.seed.wrapping_add(i))).collect();
    let results: Vec<Result<Rendered, String>> = pool(cli.jobs)?.install(|| {
        eats.par_iter().map(|e| p.render(e, &spec, None).map_err(|err| format!("{}: {err}", e.source_id))).collect()
    });
    let mut lines = Vec::new();
    for r in &results {
        match r {
            Ok(r) => {
                if *show_eat {
                    lines.push(r.eat.to_json());
                }
                lines.push(r.text());
            }
            Err(e) => {
                eprintln!("{e}");
                lines.push(String::new());
            }
        }
    }
    write_lines(out.as_deref(), &lines)?;
    report_failures(&results)
}

fn eval_cmd(cli: &Cli) -> Result<(), CliError> {
    let Command::Eval { model, test, direction, reproduce, beam, embeddings, reparser, grammar: grammar_path, table, output: out } =
        &cli.command
    else {
        unreachable!()
    };
    if direction.is_empty() && !reproduce {
        return Err(CliError::Usage("eval needs --direction or --reproduce".into()));
    }
    let directions = direction
        .iter()
        .map(|d| d.parse::<Direction>().map_err(|e| CliError::Usage(format!("--direction {d}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let model = load_model(model)?;
    let store = store_for(&model, embeddings.as_deref())?;
    let choice = ReparserChoice::new(reparser.as_deref().unwrap_or("synthetic"), grammar_path.as_deref())?;
    let forms = |l: &str| choice.forms(l);
    let mut dec = EvalDecoder::new(&model, &store, choice.reparser());
    dec.beam_width = *beam;
    dec.forms = &forms;
    let graphs = read_graphs(test)?;
    let mut inputs: Vec<(DepGraph, EatSequence)> = Vec::new();
    for g in graphs {
        match extract(&g) {
            Ok(e) => inputs.push((g, e)),
            Err(err) => log::warn!("{}: skipped, {err}", g.sentence_id()),
        }
    }
    let pool = pool(cli.jobs)?;
    let mut lines = Vec::new();
    if *reproduce {
        let examples: Vec<(Vec<String>, EatSequence)> = inputs.iter().map(|(g, e)| (g.forms(), e.clone())).collect();
        let rep = pool.install(|| reproduction_eval(&dec, &examples)).map_err(CliError::data)?;
        lines.push(if *table {
            format!("reproduction: n {} token accuracy {:.4} exact {} BLEU {:.2}", rep.n, rep.token_accuracy, rep.exact, rep.corpus_bleu)
        } else {
            serde_json::to_string(&rep).map_err(CliError::data)?
        });
    }
    let reports: Vec<EvalReport> = directions
        .iter()
        .map(|d| pool.install(|| back_transform_eval(&dec, &inputs, *d)).map_err(|e| CliError::Data(format!("{d}: {e}"))))
        .collect::<Result<_, _>>()?;
    if *table {
        if !reports.is_empty() {
            lines.push(report_table(&reports).trim_end().to_string());
        }
    } else {
        for r in &reports {
            lines.push(serde_json::to_string(r).map_err(CliError::data)?);
        }
    }
    write_lines(out.as_deref(), &lines)
}
