//! Clause-level feature detection: force, truth, voice, tense and aspect.

use crate::depgraph::{DepGraph, Token};

use super::{ClauseFeatures, EatError, Force, PrepPosition, Voice};

const SUBJECT_RELS: &[&str] = &["nsubj", "nsubjpass", "csubj", "csubjpass", "expl"];
const PAST_MODALS: &[&str] = &["could", "would", "might", "should"];
const MODALS: &[&str] = &["can", "could", "may", "might", "must", "shall", "should", "will", "would", "'ll", "wo", "ca"];

pub(crate) fn is_modal(t: &Token) -> bool {
    t.xpos.as_deref() == Some("MD") || MODALS.contains(&t.lemma.to_lowercase().as_str())
}

pub(crate) fn is_negator(t: &Token) -> bool {
    let rel = t.relation();
    let lemma = t.lemma.to_lowercase();
    rel == "neg" || (rel == "advmod" && (lemma == "not" || lemma == "n't"))
}

/// A token that heads a clause: a verb, an auxiliary used as main verb, or a
/// nominal/adjectival predicate carrying a copula.
pub(crate) fn is_predicate(graph: &DepGraph, t: &Token) -> bool {
    if t.is_verb() || t.is_aux() {
        return true;
    }
    graph.children(t.index, Some("cop")).map(|c| !c.is_empty()).unwrap_or(false)
}

fn is_present_participle(t: &Token) -> bool {
    t.feat("VerbForm") == Some("Ger")
        || (t.feat("VerbForm") == Some("Part") && t.feat("Tense") == Some("Pres"))
        || t.xpos.as_deref() == Some("VBG")
}

fn is_base_form(t: &Token) -> bool {
    t.feat("VerbForm") == Some("Inf")
        || t.feat("Mood") == Some("Imp")
        || (t.feat("Tense").is_none() && t.feat("VerbForm").is_none() && t.xpos.as_deref() == Some("VB"))
}

/// Tense carried by the finite element of a clause: `Some(true)` past,
/// `Some(false)` present, `None` non-finite.
fn finite_tense(t: &Token) -> Option<bool> {
    if is_modal(t) {
        return Some(PAST_MODALS.contains(&t.form.to_lowercase().as_str()));
    }
    let non_finite = matches!(t.feat("VerbForm"), Some("Inf" | "Part" | "Ger"));
    match t.feat("Tense") {
        Some("Past") if !non_finite => return Some(true),
        Some("Pres") if !non_finite => return Some(false),
        _ => {}
    }
    match t.xpos.as_deref() {
        Some("VBD") => Some(true),
        Some("VBZ" | "VBP") => Some(false),
        _ => None,
    }
}

/// Grammatical features of the clause headed by `verb_index`.
pub fn detect_clause_features(graph: &DepGraph, verb_index: usize) -> Result<ClauseFeatures, EatError> {
    let verb = graph.token(verb_index)?;
    if !is_predicate(graph, verb) {
        return Err(EatError::NotAVerb(verb_index));
    }
    Ok(clause_features(graph, verb))
}

pub(crate) fn clause_features(graph: &DepGraph, verb: &Token) -> ClauseFeatures {
    let children = graph.children(verb.index, None).unwrap_or_default();
    let subject = children.iter().find(|c| SUBJECT_RELS.contains(&c.relation()));
    let passive = children.iter().any(|c| matches!(c.relation(), "nsubjpass" | "csubjpass" | "auxpass"));
    let chain: Vec<&Token> = children
        .iter()
        .copied()
        .filter(|c| matches!(c.relation(), "aux" | "auxpass" | "cop"))
        .filter(|c| !(c.lemma == "to" && c.upos == "PART"))
        .collect();

    let truth = !children.iter().any(|c| is_negator(c));
    let perfect = chain.iter().any(|c| c.relation() == "aux" && c.lemma == "have");
    let imperfective = (chain.iter().any(|c| c.relation() == "aux" && c.lemma == "be") && is_present_participle(verb))
        || chain.iter().any(|c| c.relation() == "auxpass" && c.lemma == "be" && is_present_participle(c));

    let finite = chain.first().copied().unwrap_or(verb);
    let tense = finite_tense(finite);

    let force = if verb.is_root() {
        let last_is_qmark = graph.tokens().last().map(|t| t.form == "?").unwrap_or(false);
        let inverted = match (chain.first(), subject) {
            (Some(aux), Some(subj)) => aux.index < subj.index,
            _ => false,
        };
        if last_is_qmark || inverted {
            Force::Question
        } else if subject.is_none() && !passive && is_base_form(finite) {
            Force::Imperative
        } else {
            Force::Declarative
        }
    } else {
        Force::Declarative
    };

    let (present, past, perfect) = if force == Force::Imperative {
        (false, false, false)
    } else {
        (tense == Some(false), tense == Some(true), perfect)
    };

    ClauseFeatures {
        force,
        truth,
        voice: if passive { Voice::Passive } else { Voice::Active },
        present,
        past,
        perfect,
        imperfective,
        prep_position: PrepPosition::None,
    }
}
