use std::io::Write;
use std::process::{Command, Stdio};

use super::{BeamHypothesis, DecodeConstraints};
use crate::depgraph::{parse_conllu, DepGraph};
use crate::eatcore::{extract, EatSequence, EatTuple};
use crate::seq2seq::Vocab;

/// Number of leading features that describe the clause.
const CLAUSE_FEATURES: usize = 9;

/// Produces a dependency parse for a decoded token sequence.
pub trait Reparser {
    fn reparse(&self, tokens: &[String]) -> Option<DepGraph>;
}

/// Runs an external program that reads one whitespace-tokenised sentence on
/// stdin and writes CoNLL-U on stdout.
#[derive(Debug, Clone)]
pub struct CommandReparser {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandReparser {
    /// Splits a shell-like command line on whitespace.
    pub fn from_command_line(cmd: &str) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(String::from);
        Some(CommandReparser { program: parts.next()?, args: parts.collect() })
    }
}

impl Reparser for CommandReparser {
    fn reparse(&self, tokens: &[String]) -> Option<DepGraph> {
        let run = || -> Result<DepGraph, String> {
            let mut child = Command::new(&self.program)
                .args(&self.args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .spawn()
                .map_err(|e| e.to_string())?;
            {
                let mut stdin = child.stdin.take().ok_or("no stdin")?;
                writeln!(stdin, "{}", tokens.join(" ")).map_err(|e| e.to_string())?;
            }
            let out = child.wait_with_output().map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("exit status {}", out.status));
            }
            let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
            parse_conllu(&text).map_err(|e| e.to_string())?.into_iter().next().ok_or_else(|| "no sentence".to_string())
        };
        run().map_err(|e| log::warn!("reparser {}: {e}", self.program)).ok()
    }
}

fn same_lemma(a: Option<&str>, b: Option<&str>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.to_lowercase() == y.to_lowercase(),
        (None, None) => true,
        _ => false,
    }
}

/// Score adjustment for a candidate's main tuple against the original's.
/// `None` stands for a candidate that could not be re-extracted.
pub fn eat_agreement(candidate: Option<&EatTuple>, original: &EatTuple, c: &DecodeConstraints) -> f64 {
    let Some(cand) = candidate else {
        return -(CLAUSE_FEATURES as f64) * c.clause_feature_penalty;
    };
    let (a, b) = (cand.features(), original.features());
    let mut score = 0.0;
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        if i < CLAUSE_FEATURES {
            if x != y {
                score -= c.clause_feature_penalty;
            }
        } else if x == y {
            score += c.other_feature_unit;
        } else {
            score -= c.other_feature_unit;
        }
    }
    for (x, y) in [(&cand.event, &original.event), (&cand.agent, &original.agent), (&cand.theme, &original.theme)] {
        score += if same_lemma(x.lemma(), y.lemma()) { c.other_feature_unit } else { -c.other_feature_unit };
    }
    score
}

/// Beam score plus EAT agreement for every hypothesis.
pub fn rerank_scores(
    hyps: &[BeamHypothesis],
    vocab: &Vocab,
    original: &EatSequence,
    reparser: &dyn Reparser,
    c: &DecodeConstraints,
) -> Vec<f64> {
    let Some(orig) = original.first() else {
        return hyps.iter().map(|h| h.score).collect();
    };
    hyps.iter()
        .map(|h| {
            let words = h.words(vocab);
            let eat = reparser.reparse(&words).and_then(|g| extract(&g).ok());
            h.score + eat_agreement(eat.as_ref().and_then(EatSequence::first), orig, c)
        })
        .collect()
}

/// Index of the best hypothesis after EAT comparison; ties keep beam order.
pub fn rerank_by_eat(
    hyps: &[BeamHypothesis],
    vocab: &Vocab,
    original: &EatSequence,
    reparser: &dyn Reparser,
    c: &DecodeConstraints,
) -> Option<usize> {
    if hyps.len() <= 1 {
        return (!hyps.is_empty()).then_some(0);
    }
    let scores = rerank_scores(hyps, vocab, original, reparser, c);
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Some(best)
}
