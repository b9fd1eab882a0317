use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eatseq::depgraph::{parse_conllu, write_conllu, DepGraph};
use eatseq::eatcore::{category_of, extract, read_eat_jsonl, Force, Voice};
use eatseq::evalgen::{realize, Category, EvalReport, GrammarConfig, ReproductionReport, SynthGrammar};
use eatseq::pipeline::Pipeline;
use eatseq::seq2seq::Seq2SeqModel;
use eatseq::transform::TransformSpec;
use eatseq_cli::run;

fn eatseq(args: &[&str]) -> i32 {
    let mut argv = vec!["eatseq".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    run(argv)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().map(String::from).collect()
}

fn gold_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/gold.conllu")
}

/// Five declaratives and their question twins, plus a model trained on them
/// through the command line until it reproduces every one.
struct Toy {
    dir: tempfile::TempDir,
    declaratives: Vec<DepGraph>,
    questions: Vec<DepGraph>,
}

impl Toy {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn model(&self) -> PathBuf {
        self.path("toy.bin")
    }
}

fn texts(graphs: &[DepGraph]) -> Vec<String> {
    graphs.iter().map(|g| g.forms().join(" ")).collect()
}

fn toy() -> &'static Toy {
    static TOY: OnceLock<Toy> = OnceLock::new();
    TOY.get_or_init(|| {
        let grammar = SynthGrammar::new(GrammarConfig { p_name: 0.0, p_pp: 0.0, ..GrammarConfig::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut declaratives, mut questions) = (Vec::new(), Vec::new());
        for i in 0..5 {
            let mut plan = grammar.random_plan(Category::Declarative, &mut rng);
            plan.voice = Voice::Active;
            declaratives.push(realize(&plan, &format!("d{i}")).unwrap().1);
            plan.force = Force::Question;
            questions.push(realize(&plan, &format!("q{i}")).unwrap().1);
        }
        let dir = tempfile::tempdir().unwrap();
        let toy = Toy { dir, declaratives, questions };
        let all: Vec<DepGraph> = toy.declaratives.iter().chain(&toy.questions).cloned().collect();
        fs::write(toy.path("toy.conllu"), write_conllu(&all)).unwrap();
        fs::write(toy.path("decl.conllu"), write_conllu(&toy.declaratives)).unwrap();
        let code = eatseq(&[
            "--seed", "3", "train", "--corpus", s(&toy.path("toy.conllu")), "--output", s(&toy.model()),
            "--hidden", "32", "--embed-dim", "8", "--dropout", "0", "--batch", "1", "--lr", "0.01",
            "--decay-after", "1000", "--epochs", "150",
        ]);
        assert_eq!(code, 0);
        toy
    })
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(eatseq(&["--bogus"]), 1);
    assert_eq!(eatseq(&[]), 1);
    assert_eq!(eatseq(&["extract"]), 1);
    assert_eq!(eatseq(&["train", "--output", "x.bin"]), 1);
    let fixture = gold_fixture();
    for bad in ["mood=irrealis", "force=maybe", "force"] {
        assert_eq!(eatseq(&["decode", "--model", "m.bin", "--input", s(&fixture), "--set", bad]), 1, "{bad}");
    }
    assert_eq!(eatseq(&["eval", "--model", "m.bin", "--test", s(&fixture)]), 1);
    assert_eq!(eatseq(&["eval", "--model", "m.bin", "--test", s(&fixture), "--direction", "active:past"]), 1);
    assert_eq!(eatseq(&["--help"]), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing.conllu");
    assert_eq!(eatseq(&["extract", "--input", s(&missing)]), 2);
    let junk = dir.path().join("junk.bin");
    fs::write(&junk, b"not a model").unwrap();
    assert_eq!(eatseq(&["decode", "--model", s(&junk), "--input", s(&gold_fixture())]), 2);
    let broken = dir.path().join("broken.conllu");
    fs::write(&broken, "1\tdog\tdog\tNOUN\tNN\t_\t7\tnsubj\t_\t_\n\n").unwrap();
    assert_eq!(eatseq(&["extract", "--input", s(&broken)]), 2);
}

#[test]
fn extract_writes_eat_lines_and_logical_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gold.jsonl");
    assert_eq!(eatseq(&["extract", "--input", s(&gold_fixture()), "--output", s(&out), "--lf"]), 0);
    let text = fs::read_to_string(&out).unwrap();
    let all = lines(&out);
    let i = all.iter().position(|l| l.contains("\"source_id\":\"g13\"")).unwrap();
    assert_eq!(all[i + 1], "SEE*(e) ∧ DOG*(x) ∧ CAT*(y) ∧ Ag(e,x) ∧ Th(e,y)");
    let eats = read_eat_jsonl(&text).unwrap();
    let graphs = parse_conllu(&fs::read_to_string(gold_fixture()).unwrap()).unwrap();
    assert_eq!(eats.len(), graphs.len());
    for (e, g) in eats.iter().zip(&graphs) {
        assert_eq!(e, &extract(g).unwrap());
    }
}

#[test]
fn memorized_model_reproduces_its_corpus() {
    let t = toy();
    let out = t.path("identity.txt");
    assert_eq!(eatseq(&["decode", "--model", s(&t.model()), "--input", s(&t.path("toy.conllu")), "--output", s(&out)]), 0);
    let want: Vec<String> = texts(&t.declaratives).into_iter().chain(texts(&t.questions)).collect();
    assert_eq!(lines(&out), want);
}

#[test]
fn setting_force_turns_declaratives_into_questions() {
    let t = toy();
    let out = t.path("questions.txt");
    let code = eatseq(&[
        "decode", "--model", s(&t.model()), "--input", s(&t.path("decl.conllu")), "--set", "force=question",
        "--reparser", "synthetic", "--output", s(&out),
    ]);
    assert_eq!(code, 0);
    let got = lines(&out);
    assert_eq!(got, texts(&t.questions));
    let grammar = SynthGrammar::new(GrammarConfig::default()).unwrap();
    for line in &got {
        let toks: Vec<String> = line.split_whitespace().map(String::from).collect();
        let eat = extract(&grammar.parse(&toks).unwrap()).unwrap();
        assert!(Category::Question.holds(&category_of(&eat).unwrap()), "{line}");
    }
}

#[test]
fn extracted_eats_decode_like_the_in_process_pipeline() {
    let t = toy();
    let jsonl = t.path("decl.jsonl");
    assert_eq!(eatseq(&["extract", "--input", s(&t.path("decl.conllu")), "--output", s(&jsonl)]), 0);
    let (from_eat, from_parse) = (t.path("from_eat.txt"), t.path("from_parse.txt"));
    for (input, out) in [(&jsonl, &from_eat), (&t.path("decl.conllu"), &from_parse)] {
        let code = eatseq(&["decode", "--model", s(&t.model()), "--input", s(input), "--set", "tense=past", "--output", s(out)]);
        assert_eq!(code, 0);
    }
    let model = Seq2SeqModel::load(t.model()).unwrap();
    let pipeline = Pipeline::new(&model);
    let mut spec = TransformSpec::identity();
    spec.set("tense", "past").unwrap();
    let in_process: Vec<String> = t.declaratives.iter().map(|g| pipeline.transform(g, &spec).unwrap().text()).collect();
    assert_eq!(lines(&from_eat), in_process);
    assert_eq!(lines(&from_parse), in_process);
}

#[test]
fn parallel_decoding_keeps_input_order() {
    let t = toy();
    let (one, two) = (t.path("jobs1.txt"), t.path("jobs2.txt"));
    for (jobs, out) in [("1", &one), ("3", &two)] {
        let code = eatseq(&[
            "--jobs", jobs, "decode", "--model", s(&t.model()), "--input", s(&t.path("toy.conllu")), "--set",
            "truth=false", "--output", s(out),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(lines(&one), lines(&two));
    assert_eq!(lines(&one).len(), 10);
}

#[test]
fn generation_is_seeded_and_uses_the_default_clause() {
    let t = toy();
    let lex = t.path("genlex.json");
    fs::write(&lex, r#"{"verbs": ["see", "hear", "chase"], "nouns": ["dog", "cat", "man"]}"#).unwrap();
    let run_with = |seed: &str, out: &Path| {
        eatseq(&[
            "--seed", seed, "generate", "--model", s(&t.model()), "--lexicon", s(&lex), "--count", "6", "--show-eat",
            "--output", s(out),
        ])
    };
    let (a, b, c) = (t.path("gen_a.txt"), t.path("gen_b.txt"), t.path("gen_c.txt"));
    assert_eq!(run_with("5", &a), 0);
    assert_eq!(run_with("5", &b), 0);
    assert_eq!(run_with("6", &c), 0);
    assert_eq!(lines(&a), lines(&b));
    assert_ne!(lines(&a), lines(&c));
    let eats = read_eat_jsonl(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(eats.len(), 6);
    for e in &eats {
        let c = category_of(e).unwrap();
        assert!(c.truth && c.past && !c.present && c.voice == Voice::Active);
    }
}

#[test]
fn eval_reports_back_transformation_on_the_memorized_corpus() {
    let t = toy();
    let out = t.path("eval.jsonl");
    let code = eatseq(&[
        "eval", "--model", s(&t.model()), "--test", s(&t.path("toy.conllu")), "--reproduce", "--direction",
        "declarative:question", "--direction", "question:declarative", "--output", s(&out),
    ]);
    assert_eq!(code, 0);
    let all = lines(&out);
    assert_eq!(all.len(), 3);
    let rep: ReproductionReport = serde_json::from_str(&all[0]).unwrap();
    assert_eq!((rep.n, rep.exact), (10, 10));
    for line in &all[1..] {
        let r: EvalReport = serde_json::from_str(line).unwrap();
        assert_eq!(r.n_inputs, 5);
        assert_eq!(r.category_correct, 5, "{}", r.direction);
        assert_eq!(r.identical_back, 5, "{}", r.direction);
        assert!((r.corpus_bleu - 100.0).abs() < 1e-9);
    }
    let table = t.path("eval.txt");
    let code = eatseq(&[
        "eval", "--model", s(&t.model()), "--test", s(&t.path("toy.conllu")), "--direction", "declarative:question",
        "--table", "--output", s(&table),
    ]);
    assert_eq!(code, 0);
    let rows = lines(&table);
    assert!(rows[0].starts_with("Transformation"));
    assert!(rows[1].starts_with("declarative:question"));
}

#[test]
fn config_file_supplies_flag_defaults() {
    let t = toy();
    let cfg = t.path("decode.cfg");
    fs::write(&cfg, format!("# question decoding\nmodel = {}\nset = force=question\nbeam = 4\n", s(&t.model()))).unwrap();
    let out = t.path("cfg.txt");
    let code = eatseq(&["--config", s(&cfg), "decode", "--input", s(&t.path("decl.conllu")), "--output", s(&out)]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out), texts(&t.questions));
    let bad = t.path("bad.cfg");
    fs::write(&bad, "colour = blue\n").unwrap();
    assert_eq!(eatseq(&["--config", s(&bad), "decode", "--input", "x", "--model", "y"]), 1);
}
