//! Reproduction and back-transformation evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::{bleu, preprocess_tokens, sentence_bleu};
use super::categories::Direction;
use super::EvalError;
use crate::decoding::{decode, default_surface_forms, DecodeConstraints, Reparser};
use crate::depgraph::DepGraph;
use crate::eatcore::{category_of, extract, EatSequence};
use crate::seq2seq::Seq2SeqModel;
use crate::transform::apply_transform;
use crate::vectorizer::{sequence_to_matrix, EmbeddingStore};

/// Everything needed to turn an EAT back into a sentence.
pub struct EvalDecoder<'a> {
    pub model: &'a Seq2SeqModel,
    pub store: &'a EmbeddingStore,
    pub reparser: &'a (dyn Reparser + Sync),
    pub beam_width: usize,
    pub forms: &'a (dyn Fn(&str) -> Vec<String> + Sync),
}

impl<'a> EvalDecoder<'a> {
    pub fn new(model: &'a Seq2SeqModel, store: &'a EmbeddingStore, reparser: &'a (dyn Reparser + Sync)) -> Self {
        EvalDecoder { model, store, reparser, beam_width: 10, forms: &default_surface_forms }
    }

    /// Constrained beam decode of `eat`, reranked against it.
    pub fn decode(&self, eat: &EatSequence, original: &[String]) -> Result<Vec<String>, EvalError> {
        let c = DecodeConstraints::new(self.beam_width).with_original(original).with_target(eat, self.forms);
        let input = sequence_to_matrix(eat, self.store);
        let out = decode(self.model, &input, &c, Some(self.reparser), None).map_err(|e| match e {
            crate::decoding::DecodeError::Model(m) => EvalError::Model(m),
            other => EvalError::Decode(other.to_string()),
        })?;
        Ok(out.words)
    }

    fn reextract(&self, tokens: &[String]) -> Option<EatSequence> {
        self.reparser.reparse(tokens).and_then(|g| extract(&g).ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub n: usize,
    /// Position-wise token matches over the longer of output and reference.
    pub token_accuracy: f64,
    pub exact: usize,
    pub corpus_bleu: f64,
}

impl ReproductionReport {
    pub fn exact_rate(&self) -> f64 {
        self.exact as f64 / self.n.max(1) as f64
    }
}

/// Compares decoded outputs with references.
pub fn score_reproduction(outputs: &[Vec<String>], references: &[Vec<String>]) -> Result<ReproductionReport, EvalError> {
    if outputs.len() != references.len() {
        return Err(EvalError::LengthMismatch { candidates: outputs.len(), references: references.len() });
    }
    let (mut hit, mut total, mut exact) = (0usize, 0usize, 0usize);
    for (o, r) in outputs.iter().zip(references) {
        hit += o.iter().zip(r).filter(|(a, b)| a == b).count();
        total += o.len().max(r.len());
        exact += usize::from(o == r);
    }
    let cands: Vec<_> = outputs.iter().map(|o| preprocess_tokens(o)).collect();
    let refs: Vec<_> = references.iter().map(|r| preprocess_tokens(r)).collect();
    Ok(ReproductionReport {
        n: outputs.len(),
        token_accuracy: if total == 0 { 1.0 } else { hit as f64 / total as f64 },
        exact,
        corpus_bleu: bleu(&cands, &refs)?,
    })
}

/// Decodes every gold EAT and scores the outputs against the sentences.
pub fn reproduction_eval(
    dec: &EvalDecoder<'_>,
    examples: &[(Vec<String>, EatSequence)],
) -> Result<ReproductionReport, EvalError> {
    if examples.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let outputs = examples.par_iter().map(|(toks, eat)| dec.decode(eat, toks)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<_> = examples.iter().map(|(t, _)| t.clone()).collect();
    score_reproduction(&outputs, &refs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub original: Vec<String>,
    pub transformed: Vec<String>,
    pub category_correct: bool,
    pub back: Option<Vec<String>>,
    pub identical: bool,
    pub bleu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub direction: String,
    pub n_inputs: usize,
    pub category_correct: usize,
    pub identical_back: usize,
    pub corpus_bleu: f64,
    pub records: Vec<SentenceRecord>,
}

impl EvalReport {
    pub fn category_rate(&self) -> f64 {
        self.category_correct as f64 / self.n_inputs.max(1) as f64
    }

    pub fn identical_rate(&self) -> f64 {
        self.identical_back as f64 / self.n_inputs.max(1) as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Aligned plain-text table with one row per report.
pub fn report_table(reports: &[EvalReport]) -> String {
    let mut out = format!("{:<28} {:>6} {:>10} {:>10} {:>8}\n", "Transformation", "N", "Category", "Identical", "BLEU");
    for r in reports {
        out.push_str(&format!(
            "{:<28} {:>6} {:>10} {:>10} {:>8.2}\n",
            r.direction, r.n_inputs, r.category_correct, r.identical_back, r.corpus_bleu
        ));
    }
    out
}

/// Transforms each input into the target class, checks the class of the
/// decoded result and, if right, transforms it back and compares with the
/// original sentence.
pub fn back_transform_eval(
    dec: &EvalDecoder<'_>,
    inputs: &[(DepGraph, EatSequence)],
    direction: Direction,
) -> Result<EvalReport, EvalError> {
    let chosen: Vec<&(DepGraph, EatSequence)> = inputs
        .iter()
        .filter(|(_, eat)| category_of(eat).map(|c| direction.from.holds(&c)).unwrap_or(false))
        .collect();
    if chosen.is_empty() {
        return Err(EvalError::EmptyInput(direction.from.to_string()));
    }
    let records = chosen
        .par_iter()
        .map(|(graph, eat)| -> Result<SentenceRecord, EvalError> {
            let original = graph.forms();
            let target = apply_transform(eat, &direction.to.as_spec())?;
            let transformed = dec.decode(&target, &original)?;
            let reparsed = dec.reextract(&transformed);
            let category_correct = reparsed
                .as_ref()
                .and_then(|e| category_of(e).ok())
                .is_some_and(|c| direction.to.holds(&c));
            let mut rec = SentenceRecord {
                id: graph.sentence_id().to_string(),
                original,
                transformed,
                category_correct,
                back: None,
                identical: false,
                bleu: None,
            };
            if let (true, Some(eat1)) = (category_correct, reparsed) {
                let back_eat = apply_transform(&eat1, &direction.from.as_spec())?;
                let back = dec.decode(&back_eat, &rec.transformed)?;
                let (b, o) = (preprocess_tokens(&back), preprocess_tokens(&rec.original));
                rec.identical = b == o;
                rec.bleu = Some(sentence_bleu(&b, &o));
                rec.back = Some(back);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let survivors: Vec<&SentenceRecord> = records.iter().filter(|r| r.back.is_some()).collect();
    let corpus_bleu = if survivors.is_empty() {
        0.0
    } else {
        let cands: Vec<_> = survivors.iter().map(|r| preprocess_tokens(r.back.as_ref().expect("survivor"))).collect();
        let refs: Vec<_> = survivors.iter().map(|r| preprocess_tokens(&r.original)).collect();
        bleu(&cands, &refs)?
    };
    Ok(EvalReport {
        direction: direction.to_string(),
        n_inputs: records.len(),
        category_correct: records.iter().filter(|r| r.category_correct).count(),
        identical_back: records.iter().filter(|r| r.identical).count(),
        corpus_bleu,
        records,
    })
}
