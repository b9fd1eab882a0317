//! Event-Agent-Theme tuples: the domain types, the rule engine that builds
//! them from a dependency parse, and a logical-form renderer.

mod extract;
mod features;
mod lf;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::DepGraphError;

pub use extract::{extract, extract_with, ExtractOptions};
pub use features::detect_clause_features;
pub use lf::{lf_terms, render_lf, Conjunct, LfTerm};

/// Number of Boolean grammatical features carried by every tuple.
pub const FEATURE_COUNT: usize = 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EatError {
    #[error("no verbal root in sentence {0}")]
    NoMainVerb(String),
    #[error("empty EAT sequence")]
    EmptySequence,
    #[error("token {0} is not a verb")]
    NotAVerb(usize),
    #[error("invalid tuple: {0}")]
    InvalidTuple(String),
    #[error("sequence has {len} tuples, maximum is {max}")]
    TooLong { len: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] DepGraphError),
    #[error("malformed EAT record: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Force {
    #[default]
    Declarative,
    Question,
    Imperative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Voice {
    Active,
    Passive,
    /// The Event slot holds a preposition, a verb modifier or nothing.
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepPosition {
    #[default]
    None,
    Event,
    Agent,
    Theme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Event,
    Agent,
    Theme,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Event, Role::Agent, Role::Theme];

    pub fn as_prep_position(self) -> PrepPosition {
        match self {
            Role::Event => PrepPosition::Event,
            Role::Agent => PrepPosition::Agent,
            Role::Theme => PrepPosition::Theme,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Event => "event",
            Role::Agent => "agent",
            Role::Theme => "theme",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "event" => Ok(Role::Event),
            "agent" => Ok(Role::Agent),
            "theme" => Ok(Role::Theme),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Clause-level grammatical features of a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ClauseFeatures {
    pub force: Force,
    /// Affirmed (`true`) or negated.
    pub truth: bool,
    pub voice: Voice,
    pub present: bool,
    pub past: bool,
    pub perfect: bool,
    pub imperfective: bool,
    pub prep_position: PrepPosition,
}

impl ClauseFeatures {
    /// Features of a tuple whose Event slot is a modifier, a preposition or
    /// empty: everything off.
    pub fn non_verbal() -> Self {
        ClauseFeatures::default()
    }

    pub fn preposition(position: PrepPosition) -> Self {
        ClauseFeatures { prep_position: position, ..ClauseFeatures::default() }
    }

    pub fn is_verbal(&self) -> bool {
        self.voice != Voice::None
    }

    pub fn is_infinitival(&self) -> bool {
        self.is_verbal() && !self.present && !self.past && !self.perfect
    }

    pub fn validate(&self) -> Result<(), EatError> {
        if self.present && self.past {
            return Err(EatError::InvalidTuple("present and past both set".into()));
        }
        if self.prep_position != PrepPosition::None && self.voice != Voice::None {
            return Err(EatError::InvalidTuple("preposition tuple with a voice".into()));
        }
        Ok(())
    }
}

/// One of the three lexical positions of a tuple. `lemma == None` is the
/// empty token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WordSlot {
    pub lemma: Option<String>,
    pub possessive: bool,
    pub plural: bool,
    pub definite: bool,
    /// Relative pronoun whose antecedent is an Agent.
    pub rp_agent: bool,
    /// Relative pronoun whose antecedent is a Theme.
    pub rp_theme: bool,
    pub comparative: bool,
    pub superlative: bool,
}

impl WordSlot {
    pub fn empty() -> Self {
        WordSlot::default()
    }

    pub fn word(lemma: impl Into<String>) -> Self {
        WordSlot { lemma: Some(lemma.into()), ..WordSlot::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.lemma.is_none()
    }

    pub fn lemma(&self) -> Option<&str> {
        self.lemma.as_deref()
    }

    pub fn definite(mut self) -> Self {
        self.definite = true;
        self
    }

    pub fn plural(mut self) -> Self {
        self.plural = true;
        self
    }

    pub fn possessive(mut self) -> Self {
        self.possessive = true;
        self
    }

    fn has_flags(&self) -> bool {
        self.possessive
            || self.plural
            || self.definite
            || self.rp_agent
            || self.rp_theme
            || self.comparative
            || self.superlative
    }

    fn validate(&self, role: Role) -> Result<(), EatError> {
        let bad = |msg: &str| Err(EatError::InvalidTuple(format!("{role} slot: {msg}")));
        if self.is_empty() && self.has_flags() {
            return bad("empty slot carries flags");
        }
        if matches!(&self.lemma, Some(l) if l.is_empty()) {
            return bad("empty lemma string");
        }
        if self.rp_agent && self.rp_theme {
            return bad("both relative-pronoun flags set");
        }
        if self.comparative && self.superlative {
            return bad("both comparative and superlative");
        }
        if role == Role::Event
            && (self.possessive || self.plural || self.definite || self.rp_agent || self.rp_theme)
        {
            return bad("event slot only carries comparison flags");
        }
        Ok(())
    }
}

/// Token positions that produced a tuple. Kept out of the 28-feature record;
/// used to find the modifiers of an argument when it is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Anchors {
    pub event: Option<usize>,
    pub agent: Option<usize>,
    pub theme: Option<usize>,
    /// The token this tuple modifies, for modifier and preposition tuples.
    pub attached_to: Option<usize>,
}

impl Anchors {
    pub fn slot(&self, role: Role) -> Option<usize> {
        match role {
            Role::Event => self.event,
            Role::Agent => self.agent,
            Role::Theme => self.theme,
        }
    }

    pub fn is_known(&self) -> bool {
        self.event.is_some() || self.agent.is_some() || self.theme.is_some()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EatTuple {
    pub clause: ClauseFeatures,
    pub event: WordSlot,
    pub agent: WordSlot,
    pub theme: WordSlot,
    pub anchors: Anchors,
}

impl PartialEq for EatTuple {
    fn eq(&self, other: &Self) -> bool {
        self.clause == other.clause
            && self.event == other.event
            && self.agent == other.agent
            && self.theme == other.theme
    }
}

impl Eq for EatTuple {}

impl EatTuple {
    pub fn new(clause: ClauseFeatures, event: WordSlot, agent: WordSlot, theme: WordSlot) -> Self {
        EatTuple { clause, event, agent, theme, anchors: Anchors::default() }
    }

    pub fn slot(&self, role: Role) -> &WordSlot {
        match role {
            Role::Event => &self.event,
            Role::Agent => &self.agent,
            Role::Theme => &self.theme,
        }
    }

    pub fn slot_mut(&mut self, role: Role) -> &mut WordSlot {
        match role {
            Role::Event => &mut self.event,
            Role::Agent => &mut self.agent,
            Role::Theme => &mut self.theme,
        }
    }

    pub fn is_all_empty(&self) -> bool {
        self.event.is_empty() && self.agent.is_empty() && self.theme.is_empty()
    }

    pub fn validate(&self) -> Result<(), EatError> {
        self.clause.validate()?;
        for role in Role::ALL {
            self.slot(role).validate(role)?;
        }
        if self.is_all_empty() {
            return Err(EatError::InvalidTuple("all three slots empty".into()));
        }
        if self.clause.is_verbal() && self.event.is_empty() {
            return Err(EatError::InvalidTuple("verbal features on an empty event".into()));
        }
        if self.clause.prep_position != PrepPosition::None && self.event.is_empty() {
            return Err(EatError::InvalidTuple("preposition tuple without a preposition".into()));
        }
        Ok(())
    }

    /// The 28 Boolean features, in table order.
    pub fn features(&self) -> [bool; FEATURE_COUNT] {
        let c = &self.clause;
        let (ev, ag, th) = (&self.event, &self.agent, &self.theme);
        [
            c.force == Force::Question,
            c.force == Force::Imperative,
            c.truth,
            c.voice == Voice::Active,
            c.voice == Voice::Passive,
            c.present,
            c.past,
            c.perfect,
            c.imperfective,
            c.prep_position == PrepPosition::Event,
            c.prep_position == PrepPosition::Agent,
            c.prep_position == PrepPosition::Theme,
            ag.possessive,
            ag.plural,
            ag.definite,
            ag.rp_agent,
            ag.rp_theme,
            th.possessive,
            th.plural,
            th.definite,
            th.rp_agent,
            th.rp_theme,
            ev.comparative,
            ev.superlative,
            ag.comparative,
            ag.superlative,
            th.comparative,
            th.superlative,
        ]
    }

    /// Inverse of [`EatTuple::features`] plus the three lemmas.
    pub fn from_features(
        f: &[bool; FEATURE_COUNT],
        event: Option<String>,
        agent: Option<String>,
        theme: Option<String>,
    ) -> Result<Self, EatError> {
        let pick = |a: bool, b: bool, what: &str| -> Result<u8, EatError> {
            match (a, b) {
                (false, false) => Ok(0),
                (true, false) => Ok(1),
                (false, true) => Ok(2),
                (true, true) => Err(EatError::Format(format!("conflicting {what} features"))),
            }
        };
        let force = match pick(f[0], f[1], "force")? {
            0 => Force::Declarative,
            1 => Force::Question,
            _ => Force::Imperative,
        };
        let voice = match pick(f[3], f[4], "voice")? {
            0 => Voice::None,
            1 => Voice::Active,
            _ => Voice::Passive,
        };
        let prep_position = match (f[9], f[10], f[11]) {
            (false, false, false) => PrepPosition::None,
            (true, false, false) => PrepPosition::Event,
            (false, true, false) => PrepPosition::Agent,
            (false, false, true) => PrepPosition::Theme,
            _ => return Err(EatError::Format("conflicting preposition features".into())),
        };
        let clause = ClauseFeatures {
            force,
            truth: f[2],
            voice,
            present: f[5],
            past: f[6],
            perfect: f[7],
            imperfective: f[8],
            prep_position,
        };
        let event = WordSlot { lemma: event, comparative: f[22], superlative: f[23], ..WordSlot::default() };
        let agent = WordSlot {
            lemma: agent,
            possessive: f[12],
            plural: f[13],
            definite: f[14],
            rp_agent: f[15],
            rp_theme: f[16],
            comparative: f[24],
            superlative: f[25],
        };
        let theme = WordSlot {
            lemma: theme,
            possessive: f[17],
            plural: f[18],
            definite: f[19],
            rp_agent: f[20],
            rp_theme: f[21],
            comparative: f[26],
            superlative: f[27],
        };
        let tuple = EatTuple::new(clause, event, agent, theme);
        tuple.validate()?;
        Ok(tuple)
    }

    pub fn to_record(&self) -> TupleRecord {
        TupleRecord {
            features: self.features().iter().map(|&b| u8::from(b)).collect(),
            event: self.event.lemma.clone(),
            agent: self.agent.lemma.clone(),
            theme: self.theme.lemma.clone(),
        }
    }

    pub fn from_record(rec: &TupleRecord) -> Result<Self, EatError> {
        if rec.features.len() != FEATURE_COUNT {
            return Err(EatError::Format(format!(
                "expected {FEATURE_COUNT} features, found {}",
                rec.features.len()
            )));
        }
        let mut f = [false; FEATURE_COUNT];
        for (slot, &v) in f.iter_mut().zip(&rec.features) {
            *slot = match v {
                0 => false,
                1 => true,
                other => return Err(EatError::Format(format!("feature value {other} is not 0/1"))),
            };
        }
        EatTuple::from_features(&f, rec.event.clone(), rec.agent.clone(), rec.theme.clone())
    }
}

impl fmt::Display for EatTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &WordSlot| s.lemma.clone().unwrap_or_else(|| "∅".to_string());
        write!(f, "<{}, {}, {}>", show(&self.event), show(&self.agent), show(&self.theme))
    }
}

/// Wire form of one tuple in the EAT JSON-lines format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleRecord {
    pub features: Vec<u8>,
    pub event: Option<String>,
    pub agent: Option<String>,
    pub theme: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SequenceRecord {
    source_id: String,
    tuples: Vec<TupleRecord>,
}

/// Tuples for one sentence, main clause first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EatSequence {
    pub source_id: String,
    pub tuples: Vec<EatTuple>,
}

impl EatSequence {
    pub fn new(source_id: impl Into<String>, tuples: Vec<EatTuple>) -> Self {
        EatSequence { source_id: source_id.into(), tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn first(&self) -> Option<&EatTuple> {
        self.tuples.first()
    }

    /// Checks every tuple plus the sequence-level laws.
    pub fn validate(&self) -> Result<(), EatError> {
        let first = self.tuples.first().ok_or(EatError::EmptySequence)?;
        if !first.clause.is_verbal() {
            return Err(EatError::InvalidTuple("first tuple is not verbal".into()));
        }
        for (i, t) in self.tuples.iter().enumerate() {
            t.validate()?;
            let earlier = &self.tuples[..i];
            let has_agent = earlier.iter().any(|e| !e.agent.is_empty());
            let has_theme = earlier.iter().any(|e| !e.theme.is_empty());
            for slot in [&t.agent, &t.theme] {
                if slot.rp_agent && !has_agent {
                    return Err(EatError::InvalidTuple(format!("tuple {i}: relative pronoun without an earlier agent")));
                }
                if slot.rp_theme && !has_theme {
                    return Err(EatError::InvalidTuple(format!("tuple {i}: relative pronoun without an earlier theme")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let rec = SequenceRecord {
            source_id: self.source_id.clone(),
            tuples: self.tuples.iter().map(EatTuple::to_record).collect(),
        };
        serde_json::to_string(&rec).expect("sequence serializes")
    }

    pub fn from_json(line: &str) -> Result<Self, EatError> {
        let rec: SequenceRecord = serde_json::from_str(line).map_err(|e| EatError::Format(e.to_string()))?;
        let tuples = rec.tuples.iter().map(EatTuple::from_record).collect::<Result<Vec<_>, _>>()?;
        Ok(EatSequence { source_id: rec.source_id, tuples })
    }
}

impl fmt::Display for EatSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tuples {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Reads every JSON object line of an EAT JSON-lines document. Lines that do
/// not start with `{` (such as logical-form text) are skipped.
pub fn read_eat_jsonl(text: &str) -> Result<Vec<EatSequence>, EatError> {
    text.lines()
        .map(str::trim)
        .filter(|l| l.starts_with('{'))
        .map(EatSequence::from_json)
        .collect()
}

/// Clause features of the main clause.
pub fn category_of(seq: &EatSequence) -> Result<ClauseFeatures, EatError> {
    seq.first().map(|t| t.clause).ok_or(EatError::EmptySequence)
}
