//! Grammatical and lexical edits on EAT sequences.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eatcore::{ClauseFeatures, EatSequence, Force, Role, Voice, WordSlot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("empty EAT sequence")]
    EmptySequence,
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("tuple {tuple}: {slot} slot is empty")]
    SlotEmpty { tuple: usize, slot: Role },
    #[error("tuple index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("cannot remove argument: {0}")]
    NotRemovable(String),
    #[error("tuple {0} carries no anchor information")]
    MissingAnchors(usize),
    #[error("unknown transform key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("more than one edit for tuple {tuple}, slot {slot}")]
    DuplicateEdit { tuple: usize, slot: Role },
    #[error("malformed transform spec: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tense {
    Present,
    Past,
    Perfect,
    Pluperfect,
    Infinitive,
}

impl Tense {
    pub const ALL: [Tense; 5] = [Tense::Present, Tense::Past, Tense::Perfect, Tense::Pluperfect, Tense::Infinitive];

    /// Tense class carried by a verbal tuple's flags.
    pub fn of(c: &ClauseFeatures) -> Tense {
        match (c.present, c.past, c.perfect) {
            (_, true, true) => Tense::Pluperfect,
            (_, true, false) => Tense::Past,
            (_, false, true) => Tense::Perfect,
            (true, false, false) => Tense::Present,
            (false, false, false) => Tense::Infinitive,
        }
    }

    fn apply(self, c: &mut ClauseFeatures) {
        let (present, past, perfect) = match self {
            Tense::Present => (true, false, false),
            Tense::Past => (false, true, false),
            Tense::Perfect => (true, false, true),
            Tense::Pluperfect => (false, true, true),
            Tense::Infinitive => (false, false, false),
        };
        c.present = present;
        c.past = past;
        c.perfect = perfect;
    }
}

impl fmt::Display for Tense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tense::Present => "present",
            Tense::Past => "past",
            Tense::Perfect => "perfect",
            Tense::Pluperfect => "pluperfect",
            Tense::Infinitive => "infinitive",
        })
    }
}

impl FromStr for Tense {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Tense::ALL.into_iter().find(|t| t.to_string() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexicalTarget {
    Replace(String),
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEdit {
    pub tuple_index: usize,
    pub slot: Role,
    pub target: LexicalTarget,
}

/// Requested changes. `None` leaves a dimension as it is.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformSpec {
    pub force: Option<Force>,
    pub truth: Option<bool>,
    pub voice: Option<Voice>,
    pub tense: Option<Tense>,
    /// `Some(true)` imperfective, `Some(false)` perfective.
    pub imperfective: Option<bool>,
    pub lexical_edits: Vec<LexicalEdit>,
}

fn bad(key: &str, value: &str) -> TransformError {
    TransformError::BadValue { key: key.into(), value: value.into() }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdit {
    tuple_index: usize,
    slot: String,
    #[serde(default)]
    lemma: Option<String>,
    #[serde(default)]
    remove: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    force: Option<String>,
    truth: Option<serde_json::Value>,
    voice: Option<String>,
    tense: Option<String>,
    aspect: Option<String>,
    #[serde(default)]
    lexical_edits: Vec<RawEdit>,
}

impl TransformSpec {
    pub fn identity() -> Self {
        TransformSpec::default()
    }

    pub fn is_identity(&self) -> bool {
        *self == TransformSpec::default()
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), TransformError> {
        let v = value.trim().to_ascii_lowercase();
        match key.trim() {
            "force" => {
                self.force = Some(match v.as_str() {
                    "declarative" => Force::Declarative,
                    "question" => Force::Question,
                    "imperative" => Force::Imperative,
                    _ => return Err(bad(key, value)),
                })
            }
            "truth" => {
                self.truth = Some(match v.as_str() {
                    "true" | "affirmed" => true,
                    "false" | "negated" => false,
                    _ => return Err(bad(key, value)),
                })
            }
            "voice" => {
                self.voice = Some(match v.as_str() {
                    "active" => Voice::Active,
                    "passive" => Voice::Passive,
                    _ => return Err(bad(key, value)),
                })
            }
            "tense" => self.tense = Some(v.parse().map_err(|_| bad(key, value))?),
            "aspect" => {
                self.imperfective = Some(match v.as_str() {
                    "imperfective" => true,
                    "perfective" => false,
                    _ => return Err(bad(key, value)),
                })
            }
            other => return Err(TransformError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses `key=value` strings such as those given on the command line.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, TransformError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut spec = TransformSpec::default();
        for p in pairs {
            let p = p.as_ref();
            let (k, v) = p.split_once('=').ok_or_else(|| TransformError::Format(format!("expected key=value, got {p:?}")))?;
            spec.set(k, v)?;
        }
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, TransformError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| TransformError::Format(e.to_string()))?;
        let mut spec = TransformSpec::default();
        for (k, v) in [("force", &raw.force), ("voice", &raw.voice), ("tense", &raw.tense), ("aspect", &raw.aspect)] {
            if let Some(v) = v {
                spec.set(k, v)?;
            }
        }
        match raw.truth {
            None => {}
            Some(serde_json::Value::Bool(b)) => spec.truth = Some(b),
            Some(serde_json::Value::String(s)) => spec.set("truth", &s)?,
            Some(other) => return Err(bad("truth", &other.to_string())),
        }
        for e in raw.lexical_edits {
            let slot: Role = e.slot.parse().map_err(|_| bad("slot", &e.slot))?;
            let target = match (e.lemma, e.remove) {
                (Some(l), false) if !l.is_empty() => LexicalTarget::Replace(l),
                (None, true) => LexicalTarget::Remove,
                _ => return Err(TransformError::Format("edit needs exactly one of lemma or remove".into())),
            };
            spec.lexical_edits.push(LexicalEdit { tuple_index: e.tuple_index, slot, target });
        }
        spec.check_edits()?;
        Ok(spec)
    }

    fn check_edits(&self) -> Result<(), TransformError> {
        let mut seen = HashSet::new();
        for e in &self.lexical_edits {
            if !seen.insert((e.tuple_index, e.slot)) {
                return Err(TransformError::DuplicateEdit { tuple: e.tuple_index, slot: e.slot });
            }
        }
        Ok(())
    }

    /// The spec restoring `original`'s main-clause dimensions that this spec
    /// edits.
    pub fn inverse_for(&self, original: &ClauseFeatures) -> TransformSpec {
        TransformSpec {
            force: self.force.map(|_| original.force),
            truth: self.truth.map(|_| original.truth),
            voice: self.voice.map(|_| original.voice),
            tense: self.tense.map(|_| Tense::of(original)),
            imperfective: self.imperfective.map(|_| original.imperfective),
            lexical_edits: Vec::new(),
        }
    }
}

/// Applies the grammatical part of `spec` to the first tuple.
pub fn transform_grammar(seq: &EatSequence, spec: &TransformSpec) -> Result<EatSequence, TransformError> {
    let first = seq.tuples.first().ok_or(TransformError::EmptySequence)?;
    if !first.clause.is_verbal() {
        return Err(TransformError::InvalidCombination("first tuple is not verbal".into()));
    }
    let mut out = seq.clone();
    let t = &mut out.tuples[0];
    if let Some(v) = spec.voice {
        if v == Voice::None {
            return Err(TransformError::InvalidCombination("voice must be active or passive".into()));
        }
        if v != t.clause.voice {
            if v == Voice::Passive && t.theme.is_empty() {
                return Err(TransformError::InvalidCombination("passive target without a theme".into()));
            }
            if v == Voice::Active && t.agent.is_empty() {
                return Err(TransformError::InvalidCombination("active target without an agent".into()));
            }
        }
        t.clause.voice = v;
    }
    if let Some(f) = spec.force {
        t.clause.force = f;
    }
    if let Some(b) = spec.truth {
        t.clause.truth = b;
    }
    if let Some(tense) = spec.tense {
        tense.apply(&mut t.clause);
    }
    if let Some(b) = spec.imperfective {
        t.clause.imperfective = b;
    }
    Ok(out)
}

/// Grammatical edits followed by the lexical ones. Lexical edit indices
/// refer to the sequence before any removal.
pub fn apply_transform(seq: &EatSequence, spec: &TransformSpec) -> Result<EatSequence, TransformError> {
    spec.check_edits()?;
    let mut out = transform_grammar(seq, spec)?;
    for e in &spec.lexical_edits {
        if let LexicalTarget::Replace(lemma) = &e.target {
            out = replace_word(&out, e.tuple_index, e.slot, lemma)?;
        }
    }
    let mut removals: Vec<&LexicalEdit> =
        spec.lexical_edits.iter().filter(|e| e.target == LexicalTarget::Remove).collect();
    removals.sort_by_key(|e| std::cmp::Reverse(e.tuple_index));
    for e in removals {
        out = remove_argument(&out, e.tuple_index, e.slot)?;
    }
    Ok(out)
}

pub fn replace_word(seq: &EatSequence, tuple_index: usize, slot: Role, lemma: &str) -> Result<EatSequence, TransformError> {
    let t = seq.tuples.get(tuple_index).ok_or(TransformError::IndexOutOfRange(tuple_index))?;
    if t.slot(slot).is_empty() {
        return Err(TransformError::SlotEmpty { tuple: tuple_index, slot });
    }
    if lemma.trim().is_empty() {
        return Err(TransformError::InvalidCombination("replacement lemma is empty".into()));
    }
    let mut out = seq.clone();
    out.tuples[tuple_index].slot_mut(slot).lemma = Some(lemma.to_string());
    Ok(out)
}

/// Empties an argument slot and drops every tuple hanging off the removed
/// word, transitively.
pub fn remove_argument(seq: &EatSequence, tuple_index: usize, slot: Role) -> Result<EatSequence, TransformError> {
    let t = seq.tuples.get(tuple_index).ok_or(TransformError::IndexOutOfRange(tuple_index))?;
    if t.slot(slot).is_empty() {
        return Err(TransformError::SlotEmpty { tuple: tuple_index, slot });
    }
    let anchor = t.anchors.slot(slot).ok_or(TransformError::MissingAnchors(tuple_index))?;

    let mut removed_tokens: BTreeSet<usize> = BTreeSet::from([anchor]);
    let mut dropped = vec![false; seq.tuples.len()];
    loop {
        let mut changed = false;
        for (j, other) in seq.tuples.iter().enumerate() {
            if j == tuple_index || dropped[j] {
                continue;
            }
            if other.anchors.attached_to.is_some_and(|a| removed_tokens.contains(&a)) {
                dropped[j] = true;
                changed = true;
                for r in Role::ALL {
                    if let Some(a) = other.anchors.slot(r) {
                        removed_tokens.insert(a);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = seq.clone();
    let edited = &mut out.tuples[tuple_index];
    *edited.slot_mut(slot) = WordSlot::empty();
    match slot {
        Role::Event => edited.anchors.event = None,
        Role::Agent => edited.anchors.agent = None,
        Role::Theme => edited.anchors.theme = None,
    }
    if edited.clause.is_verbal() && edited.agent.is_empty() && edited.theme.is_empty() {
        return Err(TransformError::NotRemovable(format!("tuple {tuple_index} would keep no argument")));
    }
    if edited.is_all_empty() {
        dropped[tuple_index] = true;
    }
    out.tuples = out.tuples.into_iter().zip(dropped).filter(|(_, d)| !d).map(|(t, _)| t).collect();
    if out.tuples.is_empty() {
        return Err(TransformError::NotRemovable("sequence would be empty".into()));
    }
    out.validate().map_err(|e| TransformError::NotRemovable(e.to_string()))?;
    Ok(out)
}
