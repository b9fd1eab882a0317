//! `eatseq` command line: extraction, training, transformation, generation
//! and evaluation over CoNLL-U and EAT JSON-lines files.

use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;

pub use commands::EatRecord;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "eatseq", version, about = "Event-Agent-Theme sentence transformation")]
pub struct Cli {
    /// Worker threads for per-sentence work. Output order never changes.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// File of key=value lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Conllu,
    Eat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CoNLL-U to EAT JSON lines.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Follow each line with the logical form.
        #[arg(long)]
        lf: bool,
    },
    /// Trains a model on a synthetic or a parsed corpus.
    Train {
        #[arg(long)]
        output: PathBuf,
        /// Number of synthetic training sentences.
        #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
        synthetic: Option<usize>,
        /// Parsed training corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Parsed validation corpus.
        #[arg(long, requires = "corpus")]
        valid: Option<PathBuf>,
        /// Synthetic sentences held out for validation.
        #[arg(long, default_value_t = 0, requires = "synthetic")]
        held_out: usize,
        /// Where to write the held-out sentences as CoNLL-U.
        #[arg(long, requires = "synthetic")]
        held_out_output: Option<PathBuf>,
        /// Synthetic grammar as JSON.
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Lemma vectors; hashed vectors are used without them.
        #[arg(long, conflicts_with = "synthetic")]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        embed_dim: usize,
        #[arg(long, default_value_t = 128)]
        hidden: usize,
        #[arg(long, default_value_t = 0.2)]
        dropout: f64,
        #[arg(long, default_value_t = 80)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 2e-3)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        decayed_lr: f64,
        #[arg(long, default_value_t = 60)]
        decay_after: usize,
        /// Least frequency for an output token to enter the vocabulary.
        #[arg(long, default_value_t = 1)]
        min_count: usize,
    },
    /// Rewrites sentences, optionally changing their grammatical class.
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Guessed from the file when omitted.
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Clause change such as force=question (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 10)]
        beam: usize,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Placeholder lexicon as JSON.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Leave names, numbers and unknown words in place.
        #[arg(long)]
        no_mask: bool,
        /// Token counts of the style to move away from.
        #[arg(long, requires = "style_target")]
        style_source: Option<PathBuf>,
        /// Token counts of the style to move towards.
        #[arg(long, requires = "style_source")]
        style_target: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        style_weight: f64,
        /// Command that parses a sentence from stdin into CoNLL-U, or
        /// "synthetic" for the built-in grammar.
        #[arg(long)]
        reparser: Option<String>,
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
    /// Sentences from random single-tuple EATs.
    Generate {
        #[arg(long)]
        model: PathBuf,
        /// Verb and noun lists as JSON.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Clause change applied to the default clause (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 10)]
        beam: usize,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Print each EAT before its sentence.
        #[arg(long)]
        show_eat: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reproduction and back-transformation scores as JSON lines.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Parsed test sentences.
        #[arg(long)]
        test: PathBuf,
        /// Transformation such as active:passive (repeatable).
        #[arg(long)]
        direction: Vec<String>,
        /// Also score plain reproduction of the test sentences.
        #[arg(long)]
        reproduce: bool,
        #[arg(long, default_value_t = 10)]
        beam: usize,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// As for decode; defaults to the built-in grammar.
        #[arg(long)]
        reparser: Option<String>,
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Print an aligned table instead of JSON.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

const SUBCOMMANDS: &[&str] = &["extract", "train", "decode", "generate", "eval"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// `key=value` lines as flags; blank lines and `#` comments are skipped.
fn config_flags(text: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        match v.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => out.push(format!("--{key}={v}")),
        }
    }
    Ok(out)
}

/// Places config-file flags directly after the subcommand name so that
/// flags given on the command line come later and win.
fn with_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let flags = config_flags(&text)?;
    let Some(pos) = argv.iter().skip(1).position(|a| SUBCOMMANDS.contains(&a.as_str())) else { return Ok(argv) };
    let mut out = argv;
    let at = pos + 2;
    out.splice(at..at, flags);
    Ok(out)
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}\n\n{}", Cli::command().render_usage());
    1
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 1 for usage errors, 2 for data errors.
pub fn run(argv: Vec<String>) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let argv = match with_config(argv) {
        Ok(a) => a,
        Err(CliError::Usage(m)) => return usage_error(&m),
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => usage_error(&m),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn config_lines_become_flags() {
        let flags = config_flags("# defaults\nbeam = 4\nno_mask=true\nlf=false\n\n").unwrap();
        assert_eq!(flags, ["--beam=4", "--no-mask"]);
        assert!(matches!(config_flags("beam"), Err(CliError::Usage(_))));
    }

    #[test]
    fn config_flags_precede_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        std::fs::write(&cfg, "beam=4\n").unwrap();
        let argv = args(&format!("eatseq --config {} decode --beam 7", cfg.display()));
        let out = with_config(argv).unwrap();
        assert_eq!(out[3..], args("decode --beam=4 --beam 7")[..]);
    }
}
